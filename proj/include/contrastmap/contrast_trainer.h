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

#ifndef CONTRASTMAP_CONTRAST_TRAINER_H_
#define CONTRASTMAP_CONTRAST_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "contrastmap/embedding_io.h"
#include "contrastmap/neural_core.h"
#include "contrastmap/pair_dataset.h"
#include "json.hpp"

namespace contrastmap {

enum class TrainMode { kBaseline, kClassifierSystem };

std::string_view TrainModeName(TrainMode mode);
TrainMode ParseTrainMode(std::string_view name);  // "baseline" | "classifier-system"

struct TrainConfig {
  // Empty means {m, 128, 40} where m is the embedding dimension.
  std::vector<size_t> layer_dims;
  Activation hidden_activation = Activation::kTanh;
  double learning_rate = 1e-3;
  size_t batch_size = 256;
  size_t max_epochs = 50;
  size_t early_stop_patience = 5;
  double validation_fraction = 0.1;
  uint64_t seed = 0;
  TrainMode mode = TrainMode::kBaseline;
  // Classifier head, classifier-system mode only. Empty means {2k, 32, 1}.
  std::vector<size_t> head_dims;
  Activation head_activation = Activation::kTanh;

  void Validate() const;  // throws InputError
  nlohmann::json ToJson() const;
};

struct TrainReport {
  std::vector<double> train_loss;       // per epoch, mean over training batches
  std::vector<double> validation_loss;  // per epoch, after the epoch's updates
  size_t stopped_epoch = 0;
  size_t best_epoch = 0;                // 1-based epoch whose parameters were kept
  double wall_time_seconds = 0.0;
  size_t triplets_total = 0;            // resolvable triplets
  size_t triplets_validation = 0;
  size_t triplets_dropped = 0;          // unresolvable (out of vocabulary)

  // Wall time is left out so that reruns serialize identically.
  nlohmann::json ToJson() const;
};

struct TrainResult {
  MlpParams map;
  std::optional<MlpParams> head;
  TrainReport report;
};

// Siamese triplet training of the contrasting map on the cosine triplet
// loss. A seeded fraction of triplets is held out; the parameters from the
// best validation epoch are returned, and training stops after
// `early_stop_patience` epochs without improvement.
TrainResult TrainBaseline(const EmbeddingTable& table, std::span<const Triplet> triplets, const TrainConfig& config);

// Map and pair head trained jointly: each triplet gives (f(w), f(s)) labelled
// synonym and (f(w), f(a)) labelled antonym, scored by binary cross-entropy.
TrainResult TrainClassifierSystem(const EmbeddingTable& table, std::span<const Triplet> triplets,
                                  const TrainConfig& config);

// Dispatches on config.mode.
TrainResult Train(const EmbeddingTable& table, std::span<const Triplet> triplets, const TrainConfig& config);

struct SystemGradient {
  double loss = 0.0;
  MlpParams map_gradient;
  MlpParams head_gradient;
};

double ClassifierSystemLoss(const MlpParams& map, const MlpParams& head, const TripletBatch& batch);
SystemGradient ClassifierSystemBackward(const MlpParams& map, const MlpParams& head, const TripletBatch& batch);

// Fraction of the 2n (anchor, partner) pairs the head labels correctly.
double HeadAccuracy(const MlpParams& map, const MlpParams& head, const TripletBatch& batch);

// Resolves triplets against `table`; unresolvable ones are counted in
// `dropped` and skipped. Views point into `table`.
TripletBatch ResolveTriplets(const EmbeddingTable& table, std::span<const Triplet> triplets, size_t* dropped = nullptr);

// Applies the map to every row. Rows whose output norm falls below 1e-12 are
// dropped and counted.
EmbeddingTable TransformVocabulary(const MlpParams& map, const EmbeddingTable& table, size_t* dropped = nullptr);

// Per-word [raw; transformed] over the shared words, in `raw` order.
// Throws InputError when no word is shared.
EmbeddingTable ConcatEmbeddings(const EmbeddingTable& raw, const EmbeddingTable& transformed,
                                size_t* missing = nullptr);

}  // namespace contrastmap

#endif  // CONTRASTMAP_CONTRAST_TRAINER_H_
