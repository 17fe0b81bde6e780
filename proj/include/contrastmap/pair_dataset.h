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

#ifndef CONTRASTMAP_PAIR_DATASET_H_
#define CONTRASTMAP_PAIR_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace contrastmap {

enum class Relation { kSynonym, kAntonym };

std::string_view RelationName(Relation relation);

struct LabeledPair {
  std::string left;
  std::string right;
  Relation relation = Relation::kSynonym;

  bool operator==(const LabeledPair&) const = default;
};

struct PairSet {
  std::vector<LabeledPair> pairs;
  size_t dropped_conflicts = 0;
  size_t dropped_duplicates = 0;
  size_t malformed_lines = 0;

  size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
  size_t CountRelation(Relation relation) const;
};

// Distinct words appearing in any pair.
std::set<std::string> Vocabulary(const PairSet& pairs);

// Parses `left<TAB>right<TAB>relation` lines. Blank and `#` lines are ignored,
// malformed lines are counted. Pairs are unordered: repeats are dropped as
// duplicates, and a pair carrying both relations is dropped entirely.
// Throws InputError when no pair survives.
PairSet LoadPairs(std::istream& in);
PairSet LoadPairs(std::string_view text);
PairSet LoadPairFile(const std::string& path);

// Builds a PairSet from in-memory records with the same dedup and conflict
// rules as LoadPairs. Does not throw on an empty result.
PairSet MakePairSet(const std::vector<LabeledPair>& records);

void WritePairs(const PairSet& pairs, std::ostream& out);
void SavePairFile(const PairSet& pairs, const std::string& path);

// Undirected relation graph; components are numbered in order of their
// lexicographically smallest word.
struct RelationGraph {
  std::vector<std::string> vertices;  // sorted
  struct Edge {
    size_t a;
    size_t b;
    Relation relation;
  };
  std::vector<Edge> edges;
  std::vector<size_t> component;  // vertex index -> component id
  size_t component_count = 0;

  size_t VertexIndex(std::string_view word) const;  // throws if absent
};

RelationGraph BuildGraph(const PairSet& pairs);

struct ComponentStats {
  size_t component_count = 0;
  size_t giant_vertices = 0;
  size_t giant_edges = 0;
  double giant_share_of_pairs = 0.0;
  std::vector<size_t> component_vertex_counts;
  std::vector<size_t> component_edge_counts;
};

// The giant component is the one with the most vertices (ties: more edges,
// then lower id). Its share is measured over edges.
ComponentStats ComputeComponentStats(const RelationGraph& graph);

enum class SplitDecision : uint8_t {
  kTrainCycle,
  kTestCycle,
  kTrainInherited,
  kTestInherited,
  kDroppedSpanning,
};

std::string_view SplitDecisionName(SplitDecision decision);

struct SplitResult {
  PairSet train;
  PairSet test;
  size_t dropped_spanning = 0;
  std::vector<SplitDecision> trace;  // one per input pair, input order

  size_t CycleCount(SplitDecision decision) const;
};

// Leakage-free split. Pairs are visited in input order. A pair touching a
// word already assigned to one side goes to that side; a pair touching both
// sides is dropped; otherwise it takes the next slot of a cycle that sends
// `test_every - 1` pairs to train and then one to test.
SplitResult SplitPairs(const PairSet& pairs, size_t test_every = 4);

nlohmann::json SplitSummaryJson(const SplitResult& split);

struct Triplet {
  std::string anchor;
  std::string synonym;
  std::string antonym;

  bool operator==(const Triplet&) const = default;
};

// For each word with at least one synonym and one antonym in `train`, emits
// its synonym x antonym cross product, subsampled to `cap_per_anchor`
// combinations when larger. Anchors are visited in sorted order. Throws
// InputError("no triplets") when no word qualifies.
std::vector<Triplet> BuildTriplets(const PairSet& train, size_t cap_per_anchor, uint64_t seed);

}  // namespace contrastmap

#endif  // CONTRASTMAP_PAIR_DATASET_H_
