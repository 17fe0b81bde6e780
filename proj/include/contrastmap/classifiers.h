/*
 * Copyright 2026 The contrastmap Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CONTRASTMAP_CLASSIFIERS_H_
#define CONTRASTMAP_CLASSIFIERS_H_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "contrastmap/matrix.h"
#include "json.hpp"

namespace contrastmap {

enum class ClassifierKind { kLinear, kBoostedTrees };

std::string_view ClassifierKindName(ClassifierKind kind);

// Binary regression tree. Node 0 is the root; a node with feature < 0 is a
// leaf. Samples with x[feature] <= threshold go left.
struct RegressionTree {
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  std::vector<Node> nodes;

  double Predict(std::span<const double> x) const;
  size_t Depth() const;
};

// Either a logistic regression (weights, bias) or an additive ensemble of
// shallow regression trees on the log-odds scale (base_score plus
// shrinkage times each tree's leaf value).
struct PairClassifierModel {
  ClassifierKind kind = ClassifierKind::kLinear;
  size_t feature_dimension = 0;

  std::vector<double> weights;
  double bias = 0.0;

  double base_score = 0.0;
  double shrinkage = 0.0;
  std::vector<RegressionTree> trees;

  double Score(std::span<const double> x) const;        // log-odds
  double Probability(std::span<const double> x) const;  // of label 1

  void Validate() const;  // throws InputError
  nlohmann::json ToJson() const;
  static PairClassifierModel FromJson(const nlohmann::json& j);
};

struct LinearConfig {
  double learning_rate = 0.1;
  size_t epochs = 500;
  double l2 = 1e-4;
};

// Logistic regression by full-batch gradient descent on the mean log loss
// plus (l2 / 2) * |w|^2. Weights start at zero. Labels are 0/1 and both
// classes must be present.
PairClassifierModel TrainLinear(const Matrix& features, std::span<const int> labels, const LinearConfig& config);

struct BoostConfig {
  size_t rounds = 200;
  double shrinkage = 0.1;
  size_t max_depth = 2;
  double l2_leaf = 1.0;     // lambda in the Newton leaf value -G / (H + lambda)
  double min_split_gain = 0.0;
};

// Gradient boosting on the logistic loss. The ensemble starts from the
// base-rate log-odds; each round fits one tree to the gradients with exact
// greedy split search and Newton leaf values. Split ties go to the lowest
// feature index, then the lowest threshold. When `loss_history` is given it
// receives the mean training log loss before round 1 and after every round.
PairClassifierModel TrainBoosted(const Matrix& features, std::span<const int> labels, const BoostConfig& config,
                                 std::vector<double>* loss_history = nullptr);

// Mean log loss of `model` on (features, labels).
double MeanLogLoss(const PairClassifierModel& model, const Matrix& features, std::span<const int> labels);

// Fraction of rows where Probability >= 0.5 matches the label.
double RowAccuracy(const PairClassifierModel& model, const Matrix& features, std::span<const int> labels);

}  // namespace contrastmap

#endif  // CONTRASTMAP_CLASSIFIERS_H_
