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

#ifndef CONTRASTMAP_NEURAL_CORE_H_
#define CONTRASTMAP_NEURAL_CORE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "contrastmap/matrix.h"
#include "json.hpp"

namespace contrastmap {

enum class Activation { kTanh, kRelu };

std::string_view ActivationName(Activation activation);
Activation ParseActivation(std::string_view name);  // throws InputError

// Feed-forward network [m, h1, ..., k]. Hidden layers apply
// `hidden_activation`; the last layer is linear.
struct MlpParams {
  std::vector<size_t> layer_dims;
  Activation hidden_activation = Activation::kTanh;
  std::vector<Matrix> weights;               // weights[l]: layer_dims[l+1] x layer_dims[l]
  std::vector<std::vector<double>> biases;   // biases[l]: layer_dims[l+1]

  size_t num_layers() const { return weights.size(); }
  size_t input_dim() const { return layer_dims.front(); }
  size_t output_dim() const { return layer_dims.back(); }
  size_t ParameterCount() const;

  // Same shapes, every value zero.
  MlpParams ZerosLike() const;

  // Parameter buffers in a fixed order: W0, b0, W1, b1, ...
  std::vector<std::span<double>> Buffers();
  std::vector<std::span<const double>> Buffers() const;

  std::vector<double> Flatten() const;
  void Unflatten(std::span<const double> flat);

  // Throws InputError on inconsistent shapes or non-finite values.
  void Validate() const;

  bool operator==(const MlpParams&) const = default;
};

// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
// Throws InputError("not a contraction") unless the last dimension is
// smaller than the first.
MlpParams InitParams(std::span<const size_t> layer_dims, Activation hidden_activation, uint64_t seed);

std::vector<double> Forward(const MlpParams& params, std::span<const double> x);

// Per-layer outputs of one forward pass; activations[0] is the input and
// activations.back() the network output.
struct ForwardTrace {
  std::vector<std::vector<double>> activations;
};

ForwardTrace ForwardWithTrace(const MlpParams& params, std::span<const double> x);

// Backpropagates `output_grad` (dLoss/dOutput) through the pass recorded in
// `trace`, adding dLoss/dParams into `grad`. When `input_grad` is non-empty
// it receives dLoss/dInput (overwritten, not accumulated).
void Backward(const MlpParams& params, const ForwardTrace& trace, std::span<const double> output_grad,
              MlpParams& grad, std::span<double> input_grad = {});

// Three aligned views of anchor, synonym and antonym vectors.
struct TripletBatch {
  std::vector<std::span<const double>> anchors;
  std::vector<std::span<const double>> synonyms;
  std::vector<std::span<const double>> antonyms;

  size_t size() const { return anchors.size(); }
  void Add(std::span<const double> anchor, std::span<const double> synonym, std::span<const double> antonym) {
    anchors.push_back(anchor);
    synonyms.push_back(synonym);
    antonyms.push_back(antonym);
  }
};

// Norm floor used inside the cosine terms of the loss.
inline constexpr double kCosineEpsilon = 1e-12;

// Cosine similarity with norms floored at kCosineEpsilon.
double GuardedCosine(std::span<const double> u, std::span<const double> v);

// Batch mean of [1 - cos(f(w), f(s))] + [1 + cos(f(w), f(a))]. In [0, 4].
double TripletLoss(const MlpParams& params, const TripletBatch& batch);

struct LossAndGradient {
  double loss = 0.0;
  MlpParams gradient;
};

// Loss and its exact gradient; the three branches share one parameter set,
// so their contributions are summed into a single gradient.
LossAndGradient TripletBackward(const MlpParams& params, const TripletBatch& batch);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  uint64_t step_count = 0;
  MlpParams first_moment;
  MlpParams second_moment;

  static AdamState For(const MlpParams& params, AdamConfig config = {});
};

// One bias-corrected Adam update. Throws NumericError("diverged") on a
// non-finite gradient component, leaving params and state untouched.
void AdamStep(MlpParams& params, const MlpParams& grad, AdamState& state);

// Probability that (u, v) is a synonym pair: sigmoid of the head's scalar
// output on the concatenation [u; v].
double PairHeadForward(const MlpParams& head, std::span<const double> u, std::span<const double> v);

// Binary cross-entropy of the head on one labelled pair (label 1 = synonym),
// multiplied by `weight`. Adds weighted gradients into `head_grad`, and into
// `grad_u` / `grad_v` when they are non-empty. Returns the weighted loss.
double PairHeadBceBackward(const MlpParams& head, std::span<const double> u, std::span<const double> v, double label,
                           double weight, MlpParams& head_grad, std::span<double> grad_u = {},
                           std::span<double> grad_v = {});

inline constexpr int kModelFormatVersion = 1;

nlohmann::json ModelToJson(const MlpParams& params);
MlpParams ModelFromJson(const nlohmann::json& j);  // validates; throws InputError
void SaveModelFile(const MlpParams& params, const std::string& path);
MlpParams LoadModelFile(const std::string& path);

}  // namespace contrastmap

#endif  // CONTRASTMAP_NEURAL_CORE_H_
