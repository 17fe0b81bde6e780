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

#include "contrastmap/planted.h"

#include <cmath>
#include <cstdio>
#include <string>

#include "contrastmap/errors.h"
#include "contrastmap/random.h"

namespace contrastmap {
namespace {

std::string WordName(size_t index) {
  char name[32];
  std::snprintf(name, sizeof(name), "w%05zu", index);
  return name;
}

double Norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// v - (v . e) e, with e unit length.
void RemoveComponent(std::vector<double>& v, const std::vector<double>& e) {
  double dot = 0.0;
  for (size_t i = 0; i < v.size(); ++i) dot += v[i] * e[i];
  for (size_t i = 0; i < v.size(); ++i) v[i] -= dot * e[i];
}

std::vector<double> NormalVector(Rng& rng, size_t n, double scale) {
  std::vector<double> v(n);
  for (double& x : v) x = scale * rng.Normal();
  return v;
}

constexpr const char* kFillers[] = {"the", "movie", "plot", "was", "and", "it", "this", "really", "film", "story"};

}  // namespace

nlohmann::json PlantedConfig::ToJson() const {
  return {{"words", words},
          {"dimension", dimension},
          {"words_per_concept", words_per_concept},
          {"pairs_per_concept", pairs_per_concept},
          {"offset_norm", offset_norm},
          {"concept_scale", concept_scale},
          {"word_noise", word_noise},
          {"polarity_scale", polarity_scale},
          {"positive_rate", positive_rate},
          {"axis_mixing", axis_mixing},
          {"seed", seed}};
}

Relation PlantedWorld::Label(std::string_view a, std::string_view b) const {
  return Polarity(a) == Polarity(b) ? Relation::kSynonym : Relation::kAntonym;
}

int PlantedWorld::Polarity(std::string_view word) const {
  auto index = embeddings.IndexOf(word);
  if (!index) throw InputError("unknown planted word: " + std::string(word));
  return polarity[*index];
}

PlantedWorld GeneratePlantedWorld(const PlantedConfig& config) {
  if (!(config.positive_rate > 0.0 && config.positive_rate < 1.0)) throw InputError("positive_rate must be in (0, 1)");
  if (config.dimension < 2) throw InputError("planted dimension must be at least 2");
  if (config.words_per_concept < 2 || config.words < config.words_per_concept) {
    throw InputError("planted world needs at least one concept of two words");
  }
  const size_t m = config.dimension;
  const size_t concepts = config.words / config.words_per_concept;
  const size_t max_pairs = config.words_per_concept * (config.words_per_concept - 1) / 2;
  if (config.pairs_per_concept > max_pairs) throw InputError("pairs_per_concept exceeds distinct pairs");

  Rng rng(config.seed);
  PlantedWorld world;
  world.config = config;
  world.embeddings = EmbeddingTable(m, "planted");

  std::vector<double> e = NormalVector(rng, m, config.axis_mixing / std::sqrt(static_cast<double>(m)));
  e[0] += 1.0;
  const double e_norm = Norm(e);
  for (double& x : e) x /= e_norm;
  world.polarity_direction = e;

  std::vector<double> offset = NormalVector(rng, m, 1.0);
  const double offset_scale = config.offset_norm / Norm(offset);
  for (double& x : offset) x *= offset_scale;

  std::vector<std::vector<double>> centers;
  for (size_t c = 0; c < concepts; ++c) {
    auto center = NormalVector(rng, m, config.concept_scale);
    RemoveComponent(center, e);
    centers.push_back(std::move(center));
  }

  const size_t total_words = concepts * config.words_per_concept;
  std::vector<double> x(m);
  for (size_t w = 0; w < total_words; ++w) {
    const size_t c = w / config.words_per_concept;
    const int p = rng.Uniform() < config.positive_rate ? 1 : -1;
    const double magnitude = rng.Uniform(0.5, 1.5);
    auto noise = NormalVector(rng, m, config.word_noise);
    RemoveComponent(noise, e);
    for (size_t i = 0; i < m; ++i) {
      x[i] = offset[i] + centers[c][i] + noise[i] + p * magnitude * config.polarity_scale * e[i];
    }
    if (world.embeddings.Insert(WordName(w), x) != EmbeddingTable::InsertResult::kInserted) {
      throw std::logic_error("planted word rejected");
    }
    world.polarity.push_back(p);
    world.concept_of.push_back(c);
  }

  std::vector<LabeledPair> records;
  for (size_t c = 0; c < concepts; ++c) {
    const size_t base = c * config.words_per_concept;
    for (size_t code : rng.SampleWithoutReplacement(max_pairs, config.pairs_per_concept)) {
      // Decode `code` into the (i, j), i < j, pair of a triangular listing.
      size_t i = 0, remaining = code;
      while (remaining >= config.words_per_concept - 1 - i) {
        remaining -= config.words_per_concept - 1 - i;
        ++i;
      }
      const size_t j = i + 1 + remaining;
      const bool flip = rng.Uniform() < 0.5;
      const size_t a = base + (flip ? j : i);
      const size_t b = base + (flip ? i : j);
      records.push_back({WordName(a), WordName(b),
                         world.polarity[a] == world.polarity[b] ? Relation::kSynonym : Relation::kAntonym});
    }
  }
  rng.Shuffle(records);
  world.pairs = MakePairSet(records);
  return world;
}

TextDataset GenerateSentimentCorpus(const PlantedWorld& world, size_t documents, uint64_t seed) {
  if (documents < 2) throw InputError("corpus needs at least two documents");
  std::vector<size_t> positive, negative;
  for (size_t i = 0; i < world.polarity.size(); ++i) (world.polarity[i] > 0 ? positive : negative).push_back(i);
  if (positive.empty() || negative.empty()) throw InputError("planted world lacks one polarity");

  Rng rng(seed);
  TextDataset data;
  data.name = "planted-sentiment";
  for (size_t d = 0; d < documents; ++d) {
    const int label = static_cast<int>(d % 2);
    const auto& major = label == 1 ? positive : negative;
    const auto& minor = label == 1 ? negative : positive;
    std::vector<std::string> tokens;
    for (int k = 0; k < 5; ++k) tokens.push_back(world.embeddings.word(major[rng.UniformIndex(major.size())]));
    for (int k = 0; k < 3; ++k) tokens.push_back(world.embeddings.word(minor[rng.UniformIndex(minor.size())]));
    for (int k = 0; k < 4; ++k) tokens.emplace_back(kFillers[rng.UniformIndex(std::size(kFillers))]);
    rng.Shuffle(tokens);
    std::string text;
    for (size_t t = 0; t < tokens.size(); ++t) {
      if (t) text += (t % 5 == 0) ? ", " : " ";
      text += tokens[t];
    }
    text += '.';
    data.records.push_back({std::move(text), label});
  }
  return data;
}

}  // namespace contrastmap
