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

#ifndef CONTRASTMAP_PLANTED_H_
#define CONTRASTMAP_PLANTED_H_

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "contrastmap/downstream.h"
#include "contrastmap/embedding_io.h"
#include "contrastmap/pair_dataset.h"
#include "json.hpp"

namespace contrastmap {

// Synthetic vocabulary with a known synonym/antonym generator.
//
// Words are grouped into concepts. Every word carries a hidden polarity
// p = +-1 and a magnitude a in [0.5, 1.5]; its embedding is
//
//   x = offset + concept_center + noise + p * a * polarity_scale * e
//
// where centers and noise live in the complement of the unit direction e.
// Pairs are drawn inside a concept and labelled synonym iff the two
// polarities agree, so the label is the product of two hidden signs: no
// linear function of [u; v] predicts it beyond what the skewed polarity
// prior gives away. `axis_mixing` tilts e away from
// coordinate 0, which controls how much of the sign is visible to
// axis-aligned tree splits in the raw space.
struct PlantedConfig {
  size_t words = 5000;
  size_t dimension = 50;
  size_t words_per_concept = 20;
  size_t pairs_per_concept = 40;
  double offset_norm = 1.5;
  double concept_scale = 1.0;
  double word_noise = 0.35;
  double polarity_scale = 0.8;
  double positive_rate = 0.58;  // P(p = +1)
  double axis_mixing = 1.0;
  uint64_t seed = 1;

  nlohmann::json ToJson() const;
};

struct PlantedWorld {
  PlantedConfig config;
  EmbeddingTable embeddings{1};
  PairSet pairs;                  // shuffled
  std::vector<int> polarity;      // by table index
  std::vector<size_t> concept_of; // by table index
  std::vector<double> polarity_direction;

  // Ground-truth relation of two words of the same concept.
  Relation Label(std::string_view a, std::string_view b) const;
  int Polarity(std::string_view word) const;
};

PlantedWorld GeneratePlantedWorld(const PlantedConfig& config);

// Balanced two-class corpus over the world's vocabulary. A positive document
// draws most of its content words from positive-polarity words, a negative
// one from negative-polarity words; filler words outside the vocabulary are
// mixed in.
TextDataset GenerateSentimentCorpus(const PlantedWorld& world, size_t documents, uint64_t seed);

}  // namespace contrastmap

#endif  // CONTRASTMAP_PLANTED_H_
