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

#include "contrastmap/evaluation.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "contrastmap/errors.h"

namespace contrastmap {
namespace {

struct RunningStats {
  size_t count = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void Add(double x) {
    ++count;
    sum += x;
    sum_sq += x * x;
  }
  double Mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
  double Std() const {
    if (count == 0) return 0.0;
    const double m = Mean();
    return std::sqrt(std::max(0.0, sum_sq / static_cast<double>(count) - m * m));
  }
};

bool LexLess(const PairDistance& a, const PairDistance& b) {
  return std::tie(a.left, a.right) < std::tie(b.left, b.right);
}

ExtremePairs RankExtremes(std::vector<PairDistance> all, size_t n) {
  if (n < 1) throw InputError("n must be at least 1");
  ExtremePairs out;
  for (auto& p : all) {
    (p.relation == Relation::kAntonym ? out.closest_antonyms : out.farthest_synonyms).push_back(std::move(p));
  }
  std::sort(out.closest_antonyms.begin(), out.closest_antonyms.end(), [](const auto& a, const auto& b) {
    return a.distance < b.distance || (a.distance == b.distance && LexLess(a, b));
  });
  std::sort(out.farthest_synonyms.begin(), out.farthest_synonyms.end(), [](const auto& a, const auto& b) {
    return a.distance > b.distance || (a.distance == b.distance && LexLess(a, b));
  });
  if (out.closest_antonyms.size() > n) out.closest_antonyms.resize(n);
  if (out.farthest_synonyms.size() > n) out.farthest_synonyms.resize(n);
  return out;
}

nlohmann::json PairListJson(const std::vector<PairDistance>& pairs) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& p : pairs) {
    list.push_back({{"left", p.left}, {"right", p.right}, {"relation", RelationName(p.relation)},
                    {"distance", p.distance}});
  }
  return list;
}

void CheckNoLeakage(const PairSet& train_pairs, const PairSet& test_pairs) {
  const auto train_vocab = Vocabulary(train_pairs);
  for (const auto& p : test_pairs.pairs) {
    if (train_vocab.count(p.left) || train_vocab.count(p.right)) throw InputError("leakage");
  }
}

}  // namespace

size_t DistanceReport::BinOf(double distance) {
  if (!(distance > 0.0)) return 0;
  const auto bin = static_cast<size_t>(distance / kBinWidth);
  return std::min(bin, kBins - 1);
}

void DistanceReport::WriteCsv(std::ostream& out) const {
  out << "bin_lo,bin_hi,syn_count,ant_count\n";
  for (size_t b = 0; b < kBins; ++b) {
    out << FormatDouble(BinLow(b)) << ',' << FormatDouble(BinHigh(b)) << ',' << synonym_counts[b] << ','
        << antonym_counts[b] << '\n';
  }
}

nlohmann::json DistanceReport::SummaryJson() const {
  return {{"space", space_label},
          {"synonym_pairs", synonym_pairs},
          {"antonym_pairs", antonym_pairs},
          {"dropped_pairs", dropped_pairs},
          {"synonym_mean", synonym_mean},
          {"synonym_std", synonym_std},
          {"antonym_mean", antonym_mean},
          {"antonym_std", antonym_std}};
}

DistanceReport BuildDistanceReport(const EmbeddingTable& table, const PairSet& pairs, std::string space_label) {
  DistanceReport report;
  report.space_label = std::move(space_label);
  RunningStats syn, ant;
  for (const auto& p : pairs.pairs) {
    auto u = table.Lookup(p.left);
    auto v = table.Lookup(p.right);
    if (!u || !v) {
      ++report.dropped_pairs;
      continue;
    }
    const double d = CosineDistance(*u, *v);
    const size_t bin = DistanceReport::BinOf(d);
    if (p.relation == Relation::kSynonym) {
      ++report.synonym_counts[bin];
      syn.Add(d);
    } else {
      ++report.antonym_counts[bin];
      ant.Add(d);
    }
    report.pairs.push_back({p.left, p.right, p.relation, d});
  }
  if (report.pairs.empty()) throw InputError("no resolvable pairs");
  report.synonym_pairs = syn.count;
  report.antonym_pairs = ant.count;
  report.synonym_mean = syn.Mean();
  report.synonym_std = syn.Std();
  report.antonym_mean = ant.Mean();
  report.antonym_std = ant.Std();
  return report;
}

void ShiftReport::WriteCsv(std::ostream& out) const {
  out << "left,right,relation,d_before,d_after,shift\n";
  for (const auto& r : records) {
    out << r.left << ',' << r.right << ',' << RelationName(r.relation) << ',' << FormatDouble(r.d_before) << ','
        << FormatDouble(r.d_after) << ',' << FormatDouble(r.shift) << '\n';
  }
}

nlohmann::json ShiftReport::SummaryJson() const {
  return {{"synonym_pairs", synonym_pairs},
          {"antonym_pairs", antonym_pairs},
          {"dropped_pairs", dropped_pairs},
          {"mean_synonym_shift", mean_synonym_shift},
          {"mean_antonym_shift", mean_antonym_shift}};
}

ShiftReport BuildShiftReport(const EmbeddingTable& before, const EmbeddingTable& after, const PairSet& pairs) {
  ShiftReport report;
  RunningStats syn, ant;
  for (const auto& p : pairs.pairs) {
    auto ub = before.Lookup(p.left), vb = before.Lookup(p.right);
    auto ua = after.Lookup(p.left), va = after.Lookup(p.right);
    if (!ub || !vb || !ua || !va) {
      ++report.dropped_pairs;
      continue;
    }
    ShiftRecord r{p.left, p.right, p.relation, CosineDistance(*ub, *vb), CosineDistance(*ua, *va), 0.0};
    r.shift = r.d_after - r.d_before;
    (p.relation == Relation::kSynonym ? syn : ant).Add(r.shift);
    report.records.push_back(std::move(r));
  }
  if (report.records.empty()) throw InputError("no resolvable pairs");
  report.synonym_pairs = syn.count;
  report.antonym_pairs = ant.count;
  report.mean_synonym_shift = syn.Mean();
  report.mean_antonym_shift = ant.Mean();
  return report;
}

nlohmann::json ExtremePairs::ToJson() const {
  return {{"closest_antonyms", PairListJson(closest_antonyms)},
          {"farthest_synonyms", PairListJson(farthest_synonyms)}};
}

ExtremePairs FindExtremePairs(const DistanceReport& report, size_t n) { return RankExtremes(report.pairs, n); }

ExtremePairs FindExtremePairs(const ShiftReport& report, size_t n) {
  std::vector<PairDistance> all;
  all.reserve(report.records.size());
  for (const auto& r : report.records) all.push_back({r.left, r.right, r.relation, r.d_after});
  return RankExtremes(std::move(all), n);
}

std::vector<double> FeaturizePair(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw InputError("dimension mismatch");
  std::vector<double> out(u.begin(), u.end());
  out.insert(out.end(), v.begin(), v.end());
  return out;
}

PairExamples BuildPairExamples(const EmbeddingTable& table, const PairSet& pairs) {
  PairExamples ex;
  for (const auto& p : pairs.pairs) {
    auto u = table.Lookup(p.left);
    auto v = table.Lookup(p.right);
    if (!u || !v) {
      ++ex.dropped_pairs;
      continue;
    }
    ex.forward.AppendRow(FeaturizePair(*u, *v));
    ex.reversed.AppendRow(FeaturizePair(*v, *u));
    ex.labels.push_back(p.relation == Relation::kSynonym ? 1 : 0);
  }
  return ex;
}

void AugmentedTrainingSet(const PairExamples& examples, Matrix* features, std::vector<int>* labels) {
  *features = Matrix();
  labels->clear();
  for (size_t i = 0; i < examples.size(); ++i) {
    features->AppendRow(examples.forward.row(i));
    labels->push_back(examples.labels[i]);
  }
  for (size_t i = 0; i < examples.size(); ++i) {
    features->AppendRow(examples.reversed.row(i));
    labels->push_back(examples.labels[i]);
  }
}

double ClassifyAccuracy(const PairClassifierModel& model, const PairExamples& examples) {
  if (examples.size() == 0) return 0.0;
  size_t correct = 0;
  for (size_t i = 0; i < examples.size(); ++i) {
    const double p = 0.5 * (model.Probability(examples.forward.row(i)) + model.Probability(examples.reversed.row(i)));
    const int predicted = p >= 0.5 ? 1 : 0;
    if (predicted == examples.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

nlohmann::json AccuracyConfig::ToJson() const {
  return {{"linear", {{"learning_rate", linear.learning_rate}, {"epochs", linear.epochs}, {"l2", linear.l2}}},
          {"boosted",
           {{"rounds", boosted.rounds},
            {"shrinkage", boosted.shrinkage},
            {"max_depth", boosted.max_depth},
            {"l2_leaf", boosted.l2_leaf},
            {"min_split_gain", boosted.min_split_gain}}}};
}

double AccuracyTable::Accuracy(const std::string& space, ClassifierKind kind) const {
  for (const auto& r : rows) {
    if (r.space == space && r.kind == kind) return r.accuracy;
  }
  throw InputError("no accuracy row for " + space + "/" + std::string(ClassifierKindName(kind)));
}

nlohmann::json AccuracyTable::ToJson() const {
  nlohmann::json accuracy = nlohmann::json::object();
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& r : rows) {
    accuracy[r.space][std::string(ClassifierKindName(r.kind))] = r.accuracy;
    counts[r.space] = {{"train_pairs", r.train_pairs},
                       {"test_pairs", r.test_pairs},
                       {"dropped_train_pairs", r.dropped_train_pairs},
                       {"dropped_test_pairs", r.dropped_test_pairs}};
  }
  return {{"accuracy", accuracy}, {"counts", counts}, {"config", config.ToJson()}};
}

std::string AccuracyTable::ToText() const {
  std::vector<std::string> spaces;
  for (const auto& r : rows) {
    if (std::find(spaces.begin(), spaces.end(), r.space) == spaces.end()) spaces.push_back(r.space);
  }
  std::ostringstream out;
  out << std::left << std::setw(12) << "classifier";
  for (const auto& s : spaces) out << std::right << std::setw(14) << s;
  out << '\n';
  for (auto kind : {ClassifierKind::kBoostedTrees, ClassifierKind::kLinear}) {
    out << std::left << std::setw(12) << ClassifierKindName(kind);
    for (const auto& s : spaces) {
      out << std::right << std::setw(14) << std::fixed << std::setprecision(4) << Accuracy(s, kind);
    }
    out << '\n';
  }
  return out.str();
}

std::vector<AccuracyTable::Row> EvaluateSpace(const std::string& space, const EmbeddingTable& table,
                                              const PairSet& train_pairs, const PairSet& test_pairs,
                                              const AccuracyConfig& config) {
  const PairExamples train = BuildPairExamples(table, train_pairs);
  const PairExamples test = BuildPairExamples(table, test_pairs);
  if (test.size() == 0) throw InputError("no resolvable test pairs in space " + space);
  Matrix features;
  std::vector<int> labels;
  AugmentedTrainingSet(train, &features, &labels);

  std::vector<AccuracyTable::Row> rows;
  const auto linear = TrainLinear(features, labels, config.linear);
  const auto boosted = TrainBoosted(features, labels, config.boosted);
  for (const auto* model : {&linear, &boosted}) {
    AccuracyTable::Row row;
    row.space = space;
    row.kind = model->kind;
    row.accuracy = ClassifyAccuracy(*model, test);
    row.train_pairs = train.size();
    row.test_pairs = test.size();
    row.dropped_train_pairs = train.dropped_pairs;
    row.dropped_test_pairs = test.dropped_pairs;
    rows.push_back(row);
  }
  return rows;
}

AccuracyTable BuildAccuracyTable(const EmbeddingTable& raw, const EmbeddingTable& transformed,
                                 const EmbeddingTable& concatenated, const PairSet& train_pairs,
                                 const PairSet& test_pairs, const AccuracyConfig& config) {
  CheckNoLeakage(train_pairs, test_pairs);
  AccuracyTable table;
  table.config = config;
  for (const auto& [name, space] : {std::pair<std::string, const EmbeddingTable*>{"raw", &raw},
                                    {"new", &transformed},
                                    {"concatenated", &concatenated}}) {
    auto rows = EvaluateSpace(name, *space, train_pairs, test_pairs, config);
    table.rows.insert(table.rows.end(), rows.begin(), rows.end());
  }
  return table;
}

}  // namespace contrastmap
