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

#include "contrastmap/pair_dataset.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "contrastmap/errors.h"
#include "contrastmap/random.h"

namespace contrastmap {
namespace {

bool ValidToken(std::string_view token) {
  if (token.empty()) return false;
  return std::none_of(token.begin(), token.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\0';
  });
}

bool ParseRelation(std::string_view text, Relation* relation) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "synonym") {
    *relation = Relation::kSynonym;
  } else if (lower == "antonym") {
    *relation = Relation::kAntonym;
  } else {
    return false;
  }
  return true;
}

std::string UnorderedKey(std::string_view a, std::string_view b) {
  if (b < a) std::swap(a, b);
  std::string key;
  key.reserve(a.size() + b.size() + 1);
  key.append(a);
  key.push_back('\t');
  key.append(b);
  return key;
}

// Shared dedup/conflict logic for the file loader and MakePairSet.
class PairAccumulator {
 public:
  void Add(LabeledPair pair) {
    const std::string key = UnorderedKey(pair.left, pair.right);
    auto it = slots_.find(key);
    if (it == slots_.end()) {
      slots_.emplace(key, records_.size());
      records_.push_back({std::move(pair), false});
      return;
    }
    // Every input record lands in exactly one of: kept, duplicate, conflict.
    Record& record = records_[it->second];
    if (record.conflicted) {
      ++conflicts_;
    } else if (record.pair.relation == pair.relation) {
      ++duplicates_;
    } else {
      record.conflicted = true;
      conflicts_ += 2;
    }
  }

  PairSet Finish(size_t malformed) {
    PairSet out;
    out.malformed_lines = malformed;
    out.dropped_duplicates = duplicates_;
    out.dropped_conflicts = conflicts_;
    for (auto& record : records_) {
      if (!record.conflicted) out.pairs.push_back(std::move(record.pair));
    }
    return out;
  }

 private:
  struct Record {
    LabeledPair pair;
    bool conflicted;
  };
  std::vector<Record> records_;
  std::unordered_map<std::string, size_t> slots_;
  size_t duplicates_ = 0;
  size_t conflicts_ = 0;
};

}  // namespace

std::string_view RelationName(Relation relation) {
  return relation == Relation::kSynonym ? "synonym" : "antonym";
}

size_t PairSet::CountRelation(Relation relation) const {
  return static_cast<size_t>(std::count_if(pairs.begin(), pairs.end(),
                                           [&](const LabeledPair& p) { return p.relation == relation; }));
}

std::set<std::string> Vocabulary(const PairSet& pairs) {
  std::set<std::string> words;
  for (const auto& p : pairs.pairs) {
    words.insert(p.left);
    words.insert(p.right);
  }
  return words;
}

PairSet MakePairSet(const std::vector<LabeledPair>& records) {
  PairAccumulator acc;
  for (const auto& r : records) acc.Add(r);
  return acc.Finish(0);
}

PairSet LoadPairs(std::istream& in) {
  PairAccumulator acc;
  size_t malformed = 0;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (view.empty() || view.front() == '#') continue;
    if (view.find_first_not_of(" \t") == std::string_view::npos) continue;

    std::vector<std::string_view> fields;
    size_t start = 0;
    while (true) {
      const size_t tab = view.find('\t', start);
      fields.push_back(view.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    Relation relation;
    if (fields.size() != 3 || !ValidToken(fields[0]) || !ValidToken(fields[1]) ||
        fields[0] == fields[1] || !ParseRelation(fields[2], &relation)) {
      ++malformed;
      continue;
    }
    acc.Add({std::string(fields[0]), std::string(fields[1]), relation});
  }
  PairSet out = acc.Finish(malformed);
  if (out.empty()) throw InputError("no pairs");
  return out;
}

PairSet LoadPairs(std::string_view text) {
  std::istringstream in{std::string(text)};
  return LoadPairs(in);
}

PairSet LoadPairFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open pair file: " + path);
  return LoadPairs(in);
}

void WritePairs(const PairSet& pairs, std::ostream& out) {
  for (const auto& p : pairs.pairs) {
    out << p.left << '\t' << p.right << '\t' << RelationName(p.relation) << '\n';
  }
  out.flush();
  if (!out) throw std::ios_base::failure("pair write failed");
}

void SavePairFile(const PairSet& pairs, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open for writing: " + path);
  WritePairs(pairs, out);
}

size_t RelationGraph::VertexIndex(std::string_view word) const {
  auto it = std::lower_bound(vertices.begin(), vertices.end(), word);
  if (it == vertices.end() || *it != word) throw InputError("word not in graph: " + std::string(word));
  return static_cast<size_t>(it - vertices.begin());
}

RelationGraph BuildGraph(const PairSet& pairs) {
  RelationGraph graph;
  auto vocab = Vocabulary(pairs);
  graph.vertices.assign(vocab.begin(), vocab.end());

  std::vector<size_t> parent(graph.vertices.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };

  graph.edges.reserve(pairs.size());
  for (const auto& p : pairs.pairs) {
    const size_t a = graph.VertexIndex(p.left);
    const size_t b = graph.VertexIndex(p.right);
    graph.edges.push_back({a, b, p.relation});
    size_t ra = find(a), rb = find(b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }

  // Vertices are sorted, so the first time a root is met it belongs to the
  // component whose smallest word comes earliest.
  graph.component.assign(graph.vertices.size(), 0);
  std::vector<size_t> root_to_id(graph.vertices.size(), SIZE_MAX);
  for (size_t v = 0; v < graph.vertices.size(); ++v) {
    const size_t root = find(v);
    if (root_to_id[root] == SIZE_MAX) root_to_id[root] = graph.component_count++;
    graph.component[v] = root_to_id[root];
  }
  return graph;
}

ComponentStats ComputeComponentStats(const RelationGraph& graph) {
  ComponentStats stats;
  stats.component_count = graph.component_count;
  stats.component_vertex_counts.assign(graph.component_count, 0);
  stats.component_edge_counts.assign(graph.component_count, 0);
  for (size_t c : graph.component) ++stats.component_vertex_counts[c];
  for (const auto& e : graph.edges) ++stats.component_edge_counts[graph.component[e.a]];
  if (graph.component_count == 0) return stats;

  size_t giant = 0;
  for (size_t c = 1; c < graph.component_count; ++c) {
    const auto key = std::pair(stats.component_vertex_counts[c], stats.component_edge_counts[c]);
    const auto best = std::pair(stats.component_vertex_counts[giant], stats.component_edge_counts[giant]);
    if (key > best) giant = c;
  }
  stats.giant_vertices = stats.component_vertex_counts[giant];
  stats.giant_edges = stats.component_edge_counts[giant];
  stats.giant_share_of_pairs =
      graph.edges.empty() ? 0.0 : static_cast<double>(stats.giant_edges) / static_cast<double>(graph.edges.size());
  return stats;
}

std::string_view SplitDecisionName(SplitDecision decision) {
  switch (decision) {
    case SplitDecision::kTrainCycle: return "train_cycle";
    case SplitDecision::kTestCycle: return "test_cycle";
    case SplitDecision::kTrainInherited: return "train_inherited";
    case SplitDecision::kTestInherited: return "test_inherited";
    case SplitDecision::kDroppedSpanning: return "dropped_spanning";
  }
  return "unknown";
}

size_t SplitResult::CycleCount(SplitDecision decision) const {
  return static_cast<size_t>(std::count(trace.begin(), trace.end(), decision));
}

SplitResult SplitPairs(const PairSet& pairs, size_t test_every) {
  if (test_every < 2) throw InputError("test_every must be at least 2");
  enum Side : uint8_t { kTrain, kTest };
  std::unordered_map<std::string_view, Side> side;
  SplitResult result;
  result.trace.reserve(pairs.size());
  size_t cycle = 0;

  for (const auto& p : pairs.pairs) {
    auto left = side.find(p.left);
    auto right = side.find(p.right);
    const bool has_left = left != side.end();
    const bool has_right = right != side.end();

    Side target;
    SplitDecision decision;
    if (has_left && has_right) {
      if (left->second != right->second) {
        ++result.dropped_spanning;
        result.trace.push_back(SplitDecision::kDroppedSpanning);
        continue;
      }
      target = left->second;
      decision = target == kTrain ? SplitDecision::kTrainInherited : SplitDecision::kTestInherited;
    } else if (has_left || has_right) {
      target = has_left ? left->second : right->second;
      decision = target == kTrain ? SplitDecision::kTrainInherited : SplitDecision::kTestInherited;
    } else {
      target = (cycle % test_every == test_every - 1) ? kTest : kTrain;
      ++cycle;
      decision = target == kTrain ? SplitDecision::kTrainCycle : SplitDecision::kTestCycle;
    }
    side.emplace(p.left, target);
    side.emplace(p.right, target);
    (target == kTrain ? result.train : result.test).pairs.push_back(p);
    result.trace.push_back(decision);
  }
  return result;
}

nlohmann::json SplitSummaryJson(const SplitResult& split) {
  nlohmann::json j;
  j["input_pairs"] = split.trace.size();
  j["train_pairs"] = split.train.size();
  j["test_pairs"] = split.test.size();
  j["dropped_spanning"] = split.dropped_spanning;
  j["train_vocabulary"] = Vocabulary(split.train).size();
  j["test_vocabulary"] = Vocabulary(split.test).size();
  j["train_synonyms"] = split.train.CountRelation(Relation::kSynonym);
  j["train_antonyms"] = split.train.CountRelation(Relation::kAntonym);
  j["test_synonyms"] = split.test.CountRelation(Relation::kSynonym);
  j["test_antonyms"] = split.test.CountRelation(Relation::kAntonym);
  nlohmann::json decisions = nlohmann::json::object();
  for (auto d : {SplitDecision::kTrainCycle, SplitDecision::kTestCycle, SplitDecision::kTrainInherited,
                 SplitDecision::kTestInherited, SplitDecision::kDroppedSpanning}) {
    decisions[std::string(SplitDecisionName(d))] = split.CycleCount(d);
  }
  j["decisions"] = decisions;
  return j;
}

std::vector<Triplet> BuildTriplets(const PairSet& train, size_t cap_per_anchor, uint64_t seed) {
  if (cap_per_anchor == 0) throw InputError("cap_per_anchor must be positive");
  std::map<std::string, std::pair<std::set<std::string>, std::set<std::string>>> neighbours;
  for (const auto& p : train.pairs) {
    auto& l = neighbours[p.left];
    auto& r = neighbours[p.right];
    if (p.relation == Relation::kSynonym) {
      l.first.insert(p.right);
      r.first.insert(p.left);
    } else {
      l.second.insert(p.right);
      r.second.insert(p.left);
    }
  }

  Rng rng(seed);
  std::vector<Triplet> triplets;
  for (const auto& [word, rel] : neighbours) {
    const auto& [synonyms, antonyms] = rel;
    if (synonyms.empty() || antonyms.empty()) continue;
    std::vector<const std::string*> syn, ant;
    for (const auto& s : synonyms) syn.push_back(&s);
    for (const auto& a : antonyms) ant.push_back(&a);
    const size_t total = syn.size() * ant.size();
    std::vector<size_t> chosen;
    if (total > cap_per_anchor) {
      chosen = rng.SampleWithoutReplacement(total, cap_per_anchor);
    } else {
      chosen.resize(total);
      std::iota(chosen.begin(), chosen.end(), 0);
    }
    for (size_t c : chosen) {
      triplets.push_back({word, *syn[c / ant.size()], *ant[c % ant.size()]});
    }
  }
  if (triplets.empty()) throw InputError("no triplets");
  return triplets;
}

}  // namespace contrastmap
