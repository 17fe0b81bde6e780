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

#ifndef CONTRASTMAP_EVALUATION_H_
#define CONTRASTMAP_EVALUATION_H_

#include <array>
#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "contrastmap/classifiers.h"
#include "contrastmap/embedding_io.h"
#include "contrastmap/matrix.h"
#include "contrastmap/pair_dataset.h"
#include "json.hpp"

namespace contrastmap {

struct PairDistance {
  std::string left;
  std::string right;
  Relation relation = Relation::kSynonym;
  double distance = 0.0;
};

// Cosine-distance histogram over [0, 2] split by relation.
struct DistanceReport {
  static constexpr size_t kBins = 100;
  static constexpr double kBinWidth = 2.0 / kBins;

  std::string space_label;
  std::array<size_t, kBins> synonym_counts{};
  std::array<size_t, kBins> antonym_counts{};
  size_t synonym_pairs = 0;
  size_t antonym_pairs = 0;
  size_t dropped_pairs = 0;  // not resolvable in the table
  double synonym_mean = 0.0;
  double synonym_std = 0.0;
  double antonym_mean = 0.0;
  double antonym_std = 0.0;
  std::vector<PairDistance> pairs;  // input order

  static double BinLow(size_t bin) { return static_cast<double>(bin) * kBinWidth; }
  static double BinHigh(size_t bin) { return static_cast<double>(bin + 1) * kBinWidth; }
  static size_t BinOf(double distance);

  // bin_lo,bin_hi,syn_count,ant_count
  void WriteCsv(std::ostream& out) const;
  nlohmann::json SummaryJson() const;
};

// Throws InputError when no pair is resolvable.
DistanceReport BuildDistanceReport(const EmbeddingTable& table, const PairSet& pairs, std::string space_label = {});

struct ShiftRecord {
  std::string left;
  std::string right;
  Relation relation = Relation::kSynonym;
  double d_before = 0.0;
  double d_after = 0.0;
  double shift = 0.0;  // d_after - d_before
};

struct ShiftReport {
  std::vector<ShiftRecord> records;
  size_t synonym_pairs = 0;
  size_t antonym_pairs = 0;
  size_t dropped_pairs = 0;
  double mean_synonym_shift = 0.0;
  double mean_antonym_shift = 0.0;

  // left,right,relation,d_before,d_after,shift
  void WriteCsv(std::ostream& out) const;
  nlohmann::json SummaryJson() const;
};

// Per-pair change of cosine distance from `before` to `after`, over pairs
// resolvable in both. Throws InputError when none is.
ShiftReport BuildShiftReport(const EmbeddingTable& before, const EmbeddingTable& after, const PairSet& pairs);

struct ExtremePairs {
  std::vector<PairDistance> closest_antonyms;
  std::vector<PairDistance> farthest_synonyms;

  nlohmann::json ToJson() const;
};

// Antonyms with the smallest distance and synonyms with the largest; ties
// broken by (left, right). Shift reports are ranked by d_after. Lists are
// truncated when fewer than n pairs exist.
ExtremePairs FindExtremePairs(const DistanceReport& report, size_t n);
ExtremePairs FindExtremePairs(const ShiftReport& report, size_t n);

// [u; v]
std::vector<double> FeaturizePair(std::span<const double> u, std::span<const double> v);

// Featurized pairs in both orders. Label 1 = synonym.
struct PairExamples {
  Matrix forward;   // rows [u; v]
  Matrix reversed;  // rows [v; u]
  std::vector<int> labels;
  size_t dropped_pairs = 0;

  size_t size() const { return labels.size(); }
};

PairExamples BuildPairExamples(const EmbeddingTable& table, const PairSet& pairs);

// Both orders stacked, labels repeated: the training view of a pair set.
void AugmentedTrainingSet(const PairExamples& examples, Matrix* features, std::vector<int>* labels);

// Accuracy per unordered pair: the two orders' probabilities are averaged and
// thresholded at 0.5 (>= 0.5 means synonym).
double ClassifyAccuracy(const PairClassifierModel& model, const PairExamples& examples);

struct AccuracyConfig {
  LinearConfig linear;
  BoostConfig boosted;

  nlohmann::json ToJson() const;
};

struct AccuracyTable {
  struct Row {
    std::string space;
    ClassifierKind kind = ClassifierKind::kLinear;
    double accuracy = 0.0;
    size_t train_pairs = 0;
    size_t test_pairs = 0;
    size_t dropped_train_pairs = 0;
    size_t dropped_test_pairs = 0;
  };
  std::vector<Row> rows;
  AccuracyConfig config;

  double Accuracy(const std::string& space, ClassifierKind kind) const;  // throws if absent
  nlohmann::json ToJson() const;
  std::string ToText() const;
};

// Trains linear and boosted pair classifiers on each of the raw, new and
// concatenated spaces and scores them on the test pairs. Throws
// InputError("leakage") if any test word occurs in the training pairs.
AccuracyTable BuildAccuracyTable(const EmbeddingTable& raw, const EmbeddingTable& transformed,
                                 const EmbeddingTable& concatenated, const PairSet& train_pairs,
                                 const PairSet& test_pairs, const AccuracyConfig& config = {});

// Accuracy rows for a single space.
std::vector<AccuracyTable::Row> EvaluateSpace(const std::string& space, const EmbeddingTable& table,
                                              const PairSet& train_pairs, const PairSet& test_pairs,
                                              const AccuracyConfig& config);

}  // namespace contrastmap

#endif  // CONTRASTMAP_EVALUATION_H_
