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

#include "contrastmap/contrast_trainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "contrastmap/errors.h"
#include "contrastmap/random.h"

namespace contrastmap {
namespace {

constexpr double kMinOutputNorm = 1e-12;

TripletBatch Subset(const TripletBatch& all, std::span<const size_t> indices) {
  TripletBatch out;
  for (size_t i : indices) out.Add(all.anchors[i], all.synonyms[i], all.antonyms[i]);
  return out;
}

std::vector<size_t> MapDims(const TrainConfig& config, size_t input_dim) {
  if (!config.layer_dims.empty()) {
    if (config.layer_dims.front() != input_dim) {
      throw InputError("layer_dims[0] = " + std::to_string(config.layer_dims.front()) +
                       " does not match embedding dimension " + std::to_string(input_dim));
    }
    return config.layer_dims;
  }
  return {input_dim, 128, 40};
}

std::vector<size_t> HeadDims(const TrainConfig& config, size_t map_output) {
  if (!config.head_dims.empty()) {
    if (config.head_dims.front() != 2 * map_output || config.head_dims.back() != 1) {
      throw InputError("head_dims must start at 2k and end at 1");
    }
    return config.head_dims;
  }
  return {2 * map_output, 32, 1};
}

struct Partition {
  std::vector<size_t> train;
  std::vector<size_t> validation;
};

Partition PartitionTriplets(size_t n, double validation_fraction, Rng& rng) {
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.Shuffle(order);
  Partition p;
  if (n == 1) {
    // A single triplet is both trained on and validated against.
    p.train = order;
    p.validation = order;
    return p;
  }
  size_t n_val = static_cast<size_t>(std::floor(validation_fraction * static_cast<double>(n)));
  n_val = std::clamp<size_t>(n_val, 1, n - 1);
  p.validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  p.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(p.validation.begin(), p.validation.end());
  return p;
}

void CheckFinite(double loss) {
  if (!std::isfinite(loss)) throw NumericError("diverged");
}

// Shared epoch loop. `Model` holds everything being trained; `step` runs one
// mini-batch update and returns its loss, `evaluate` scores a batch.
template <typename Model, typename StepFn, typename EvalFn>
TrainReport RunEpochs(Model& model, const TripletBatch& all, const TrainConfig& config, StepFn step,
                      EvalFn evaluate) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  Partition part = PartitionTriplets(all.size(), config.validation_fraction, rng);
  const TripletBatch validation = Subset(all, part.validation);

  TrainReport report;
  report.triplets_total = all.size();
  report.triplets_validation = part.validation.size();

  Model best = model;
  double best_loss = std::numeric_limits<double>::infinity();
  size_t since_best = 0;
  std::vector<size_t> order = part.train;
  for (size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng.Shuffle(order);
    double weighted = 0.0;
    for (size_t start_idx = 0; start_idx < order.size(); start_idx += config.batch_size) {
      const size_t end_idx = std::min(order.size(), start_idx + config.batch_size);
      const TripletBatch batch =
          Subset(all, std::span<const size_t>(order.data() + start_idx, end_idx - start_idx));
      const double loss = step(model, batch);
      CheckFinite(loss);
      weighted += loss * static_cast<double>(batch.size());
    }
    const double train_loss = weighted / static_cast<double>(order.size());
    const double val_loss = evaluate(model, validation);
    CheckFinite(val_loss);
    report.train_loss.push_back(train_loss);
    report.validation_loss.push_back(val_loss);
    report.stopped_epoch = epoch;
    if (val_loss < best_loss) {
      best_loss = val_loss;
      best = model;
      report.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.early_stop_patience) {
      break;
    }
  }
  model = std::move(best);
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

struct MapModel {
  MlpParams map;
  AdamState adam;
};

struct SystemModel {
  MlpParams map;
  MlpParams head;
  AdamState map_adam;
  AdamState head_adam;
};

}  // namespace

std::string_view TrainModeName(TrainMode mode) {
  return mode == TrainMode::kBaseline ? "baseline" : "classifier-system";
}

TrainMode ParseTrainMode(std::string_view name) {
  if (name == "baseline") return TrainMode::kBaseline;
  if (name == "classifier-system" || name == "classifier_system") return TrainMode::kClassifierSystem;
  throw InputError("unknown training mode: " + std::string(name));
}

void TrainConfig::Validate() const {
  if (!(validation_fraction > 0.0 && validation_fraction <= 0.5)) {
    throw InputError("validation_fraction must be in (0, 0.5]");
  }
  if (max_epochs < 1) throw InputError("max_epochs must be at least 1");
  if (batch_size < 1) throw InputError("batch_size must be at least 1");
  if (early_stop_patience < 1) throw InputError("early_stop_patience must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw InputError("learning_rate must be positive");
}

nlohmann::json TrainConfig::ToJson() const {
  nlohmann::json j;
  j["layer_dims"] = layer_dims;
  j["hidden_activation"] = std::string(ActivationName(hidden_activation));
  j["learning_rate"] = learning_rate;
  j["batch_size"] = batch_size;
  j["max_epochs"] = max_epochs;
  j["early_stop_patience"] = early_stop_patience;
  j["validation_fraction"] = validation_fraction;
  j["seed"] = seed;
  j["mode"] = std::string(TrainModeName(mode));
  if (mode == TrainMode::kClassifierSystem) {
    j["head_dims"] = head_dims;
    j["head_activation"] = std::string(ActivationName(head_activation));
  }
  return j;
}

nlohmann::json TrainReport::ToJson() const {
  nlohmann::json j;
  j["train_loss"] = train_loss;
  j["validation_loss"] = validation_loss;
  j["stopped_epoch"] = stopped_epoch;
  j["best_epoch"] = best_epoch;
  j["triplets_total"] = triplets_total;
  j["triplets_validation"] = triplets_validation;
  j["triplets_dropped"] = triplets_dropped;
  return j;
}

TripletBatch ResolveTriplets(const EmbeddingTable& table, std::span<const Triplet> triplets, size_t* dropped) {
  TripletBatch batch;
  size_t missing = 0;
  for (const auto& t : triplets) {
    auto w = table.Lookup(t.anchor);
    auto s = table.Lookup(t.synonym);
    auto a = table.Lookup(t.antonym);
    if (!w || !s || !a) {
      ++missing;
      continue;
    }
    batch.Add(*w, *s, *a);
  }
  if (dropped) *dropped = missing;
  return batch;
}

TrainResult TrainBaseline(const EmbeddingTable& table, std::span<const Triplet> triplets, const TrainConfig& config) {
  config.Validate();
  if (config.mode != TrainMode::kBaseline) throw InputError("TrainBaseline requires mode=baseline");
  size_t dropped = 0;
  const TripletBatch all = ResolveTriplets(table, triplets, &dropped);
  if (all.size() == 0) throw InputError("no resolvable triplets");

  const auto dims = MapDims(config, table.dimension());
  MapModel model{InitParams(dims, config.hidden_activation, config.seed), {}};
  model.adam = AdamState::For(model.map, {.learning_rate = config.learning_rate});

  TrainReport report = RunEpochs(
      model, all, config,
      [](MapModel& m, const TripletBatch& batch) {
        LossAndGradient lg = TripletBackward(m.map, batch);
        CheckFinite(lg.loss);
        AdamStep(m.map, lg.gradient, m.adam);
        return lg.loss;
      },
      [](const MapModel& m, const TripletBatch& batch) { return TripletLoss(m.map, batch); });
  report.triplets_dropped = dropped;
  return {std::move(model.map), std::nullopt, std::move(report)};
}

double ClassifierSystemLoss(const MlpParams& map, const MlpParams& head, const TripletBatch& batch) {
  if (batch.size() == 0) throw InputError("empty triplet batch");
  MlpParams scratch = head.ZerosLike();
  const double weight = 0.5 / static_cast<double>(batch.size());
  double total = 0.0;
  for (size_t i = 0; i < batch.size(); ++i) {
    const auto fw = Forward(map, batch.anchors[i]);
    const auto fs = Forward(map, batch.synonyms[i]);
    const auto fa = Forward(map, batch.antonyms[i]);
    total += PairHeadBceBackward(head, fw, fs, 1.0, weight, scratch);
    total += PairHeadBceBackward(head, fw, fa, 0.0, weight, scratch);
  }
  return total;
}

SystemGradient ClassifierSystemBackward(const MlpParams& map, const MlpParams& head, const TripletBatch& batch) {
  if (batch.size() == 0) throw InputError("empty triplet batch");
  SystemGradient out;
  out.map_gradient = map.ZerosLike();
  out.head_gradient = head.ZerosLike();
  const double weight = 0.5 / static_cast<double>(batch.size());
  const size_t k = map.output_dim();
  std::vector<double> dw(k), ds(k), da(k);
  for (size_t i = 0; i < batch.size(); ++i) {
    const ForwardTrace tw = ForwardWithTrace(map, batch.anchors[i]);
    const ForwardTrace ts = ForwardWithTrace(map, batch.synonyms[i]);
    const ForwardTrace ta = ForwardWithTrace(map, batch.antonyms[i]);
    std::fill(dw.begin(), dw.end(), 0.0);
    std::fill(ds.begin(), ds.end(), 0.0);
    std::fill(da.begin(), da.end(), 0.0);
    out.loss += PairHeadBceBackward(head, tw.activations.back(), ts.activations.back(), 1.0, weight,
                                    out.head_gradient, dw, ds);
    out.loss += PairHeadBceBackward(head, tw.activations.back(), ta.activations.back(), 0.0, weight,
                                    out.head_gradient, dw, da);
    Backward(map, tw, dw, out.map_gradient);
    Backward(map, ts, ds, out.map_gradient);
    Backward(map, ta, da, out.map_gradient);
  }
  return out;
}

double HeadAccuracy(const MlpParams& map, const MlpParams& head, const TripletBatch& batch) {
  if (batch.size() == 0) return 0.0;
  size_t correct = 0;
  for (size_t i = 0; i < batch.size(); ++i) {
    const auto fw = Forward(map, batch.anchors[i]);
    if (PairHeadForward(head, fw, Forward(map, batch.synonyms[i])) >= 0.5) ++correct;
    if (PairHeadForward(head, fw, Forward(map, batch.antonyms[i])) < 0.5) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(2 * batch.size());
}

TrainResult TrainClassifierSystem(const EmbeddingTable& table, std::span<const Triplet> triplets,
                                  const TrainConfig& config) {
  config.Validate();
  if (config.mode != TrainMode::kClassifierSystem) {
    throw InputError("TrainClassifierSystem requires mode=classifier-system");
  }
  size_t dropped = 0;
  const TripletBatch all = ResolveTriplets(table, triplets, &dropped);
  if (all.size() == 0) throw InputError("no resolvable triplets");

  const auto dims = MapDims(config, table.dimension());
  SystemModel model;
  model.map = InitParams(dims, config.hidden_activation, config.seed);
  model.head = InitParams(HeadDims(config, dims.back()), config.head_activation, config.seed + 1);
  model.map_adam = AdamState::For(model.map, {.learning_rate = config.learning_rate});
  model.head_adam = AdamState::For(model.head, {.learning_rate = config.learning_rate});

  TrainReport report = RunEpochs(
      model, all, config,
      [](SystemModel& m, const TripletBatch& batch) {
        SystemGradient g = ClassifierSystemBackward(m.map, m.head, batch);
        CheckFinite(g.loss);
        AdamStep(m.map, g.map_gradient, m.map_adam);
        AdamStep(m.head, g.head_gradient, m.head_adam);
        return g.loss;
      },
      [](const SystemModel& m, const TripletBatch& batch) { return ClassifierSystemLoss(m.map, m.head, batch); });
  report.triplets_dropped = dropped;
  return {std::move(model.map), std::move(model.head), std::move(report)};
}

TrainResult Train(const EmbeddingTable& table, std::span<const Triplet> triplets, const TrainConfig& config) {
  return config.mode == TrainMode::kBaseline ? TrainBaseline(table, triplets, config)
                                             : TrainClassifierSystem(table, triplets, config);
}

EmbeddingTable TransformVocabulary(const MlpParams& map, const EmbeddingTable& table, size_t* dropped) {
  if (map.input_dim() != table.dimension()) throw InputError("dimension mismatch between map and table");
  EmbeddingTable out(map.output_dim(), table.source_label() + "+contrast");
  size_t skipped = 0;
  for (size_t i = 0; i < table.size(); ++i) {
    const auto y = Forward(map, table.row(i));
    double norm_sq = 0.0;
    for (double v : y) norm_sq += v * v;
    if (!(std::sqrt(norm_sq) >= kMinOutputNorm) ||
        out.Insert(table.word(i), y) != EmbeddingTable::InsertResult::kInserted) {
      ++skipped;
    }
  }
  if (dropped) *dropped = skipped;
  return out;
}

EmbeddingTable ConcatEmbeddings(const EmbeddingTable& raw, const EmbeddingTable& transformed, size_t* missing) {
  EmbeddingTable out(raw.dimension() + transformed.dimension(), raw.source_label() + "+concat");
  std::vector<double> joined(out.dimension());
  size_t absent = 0;
  for (size_t i = 0; i < raw.size(); ++i) {
    auto other = transformed.Lookup(raw.word(i));
    if (!other) {
      ++absent;
      continue;
    }
    auto r = raw.row(i);
    std::copy(r.begin(), r.end(), joined.begin());
    std::copy(other->begin(), other->end(), joined.begin() + static_cast<std::ptrdiff_t>(r.size()));
    out.Insert(raw.word(i), joined);
  }
  for (const auto& w : transformed.words()) {
    if (!raw.Contains(w)) ++absent;
  }
  if (out.empty()) throw InputError("no shared words to concatenate");
  if (missing) *missing = absent;
  return out;
}

}  // namespace contrastmap
