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

#include "contrastmap/classifiers.h"

#include <algorithm>
#include <cmath>

#include "contrastmap/errors.h"

namespace contrastmap {
namespace {

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double Softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void CheckLabels(const Matrix& features, std::span<const int> labels) {
  if (features.rows() != labels.size()) throw InputError("feature/label count mismatch");
  if (features.rows() == 0) throw InputError("empty training set");
  bool has_pos = false, has_neg = false;
  for (int y : labels) {
    if (y != 0 && y != 1) throw InputError("labels must be 0 or 1");
    (y == 1 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) throw InputError("single-class training data");
}

}  // namespace

std::string_view ClassifierKindName(ClassifierKind kind) {
  return kind == ClassifierKind::kLinear ? "linear" : "boosted";
}

double RegressionTree::Predict(std::span<const double> x) const {
  size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& n = nodes[i];
    i = static_cast<size_t>(x[static_cast<size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[i].value;
}

size_t RegressionTree::Depth() const {
  std::vector<size_t> depth(nodes.size(), 0);
  size_t deepest = 0;
  for (size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, depth[i]);
    if (nodes[i].feature >= 0) {
      depth[static_cast<size_t>(nodes[i].left)] = depth[i] + 1;
      depth[static_cast<size_t>(nodes[i].right)] = depth[i] + 1;
    }
  }
  return deepest;
}

double PairClassifierModel::Score(std::span<const double> x) const {
  if (x.size() != feature_dimension) throw InputError("classifier feature dimension mismatch");
  if (kind == ClassifierKind::kLinear) {
    double s = bias;
    for (size_t i = 0; i < weights.size(); ++i) s += weights[i] * x[i];
    return s;
  }
  double s = base_score;
  for (const auto& tree : trees) s += shrinkage * tree.Predict(x);
  return s;
}

double PairClassifierModel::Probability(std::span<const double> x) const { return Sigmoid(Score(x)); }

void PairClassifierModel::Validate() const {
  if (kind == ClassifierKind::kLinear) {
    if (weights.size() != feature_dimension) throw InputError("linear weight length != feature dimension");
    return;
  }
  for (const auto& tree : trees) {
    if (tree.nodes.empty()) throw InputError("empty tree");
    for (const auto& n : tree.nodes) {
      if (n.feature < 0) continue;
      if (static_cast<size_t>(n.feature) >= feature_dimension) throw InputError("tree feature index out of range");
      if (n.left < 0 || n.right < 0 || static_cast<size_t>(n.left) >= tree.nodes.size() ||
          static_cast<size_t>(n.right) >= tree.nodes.size()) {
        throw InputError("tree child index out of range");
      }
    }
  }
}

nlohmann::json PairClassifierModel::ToJson() const {
  nlohmann::json j;
  j["kind"] = std::string(ClassifierKindName(kind));
  j["feature_dimension"] = feature_dimension;
  if (kind == ClassifierKind::kLinear) {
    j["weights"] = weights;
    j["bias"] = bias;
    return j;
  }
  j["base_score"] = base_score;
  j["shrinkage"] = shrinkage;
  j["trees"] = nlohmann::json::array();
  for (const auto& tree : trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tree.nodes) {
      nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right},
                       {"value", n.value}});
    }
    j["trees"].push_back(nodes);
  }
  return j;
}

PairClassifierModel PairClassifierModel::FromJson(const nlohmann::json& j) {
  try {
    PairClassifierModel m;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "linear") {
      m.kind = ClassifierKind::kLinear;
    } else if (kind == "boosted") {
      m.kind = ClassifierKind::kBoostedTrees;
    } else {
      throw InputError("unknown classifier kind: " + kind);
    }
    m.feature_dimension = j.at("feature_dimension").get<size_t>();
    if (m.kind == ClassifierKind::kLinear) {
      m.weights = j.at("weights").get<std::vector<double>>();
      m.bias = j.at("bias").get<double>();
    } else {
      m.base_score = j.at("base_score").get<double>();
      m.shrinkage = j.at("shrinkage").get<double>();
      for (const auto& nodes : j.at("trees")) {
        RegressionTree tree;
        for (const auto& n : nodes) {
          tree.nodes.push_back({n.at("feature").get<int>(), n.at("threshold").get<double>(), n.at("left").get<int>(),
                                n.at("right").get<int>(), n.at("value").get<double>()});
        }
        m.trees.push_back(std::move(tree));
      }
    }
    m.Validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed classifier JSON: ") + e.what());
  }
}

PairClassifierModel TrainLinear(const Matrix& features, std::span<const int> labels, const LinearConfig& config) {
  CheckLabels(features, labels);
  const size_t n = features.rows();
  const size_t d = features.cols();
  PairClassifierModel model;
  model.kind = ClassifierKind::kLinear;
  model.feature_dimension = d;
  model.weights.assign(d, 0.0);

  std::vector<double> grad(d);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_bias = 0.0;
    for (size_t i = 0; i < n; ++i) {
      auto x = features.row(i);
      double z = model.bias;
      for (size_t k = 0; k < d; ++k) z += model.weights[k] * x[k];
      const double residual = Sigmoid(z) - static_cast<double>(labels[i]);
      grad_bias += residual;
      for (size_t k = 0; k < d; ++k) grad[k] += residual * x[k];
    }
    for (size_t k = 0; k < d; ++k) {
      model.weights[k] -= config.learning_rate * (grad[k] * inv_n + config.l2 * model.weights[k]);
    }
    model.bias -= config.learning_rate * grad_bias * inv_n;
  }
  return model;
}

double MeanLogLoss(const PairClassifierModel& model, const Matrix& features, std::span<const int> labels) {
  if (features.rows() == 0) return 0.0;
  double total = 0.0;
  for (size_t i = 0; i < features.rows(); ++i) {
    const double z = model.Score(features.row(i));
    total += Softplus(z) - static_cast<double>(labels[i]) * z;
  }
  return total / static_cast<double>(features.rows());
}

double RowAccuracy(const PairClassifierModel& model, const Matrix& features, std::span<const int> labels) {
  if (features.rows() == 0) return 0.0;
  size_t correct = 0;
  for (size_t i = 0; i < features.rows(); ++i) {
    const int predicted = model.Probability(features.row(i)) >= 0.5 ? 1 : 0;
    if (predicted == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(features.rows());
}

}  // namespace contrastmap
