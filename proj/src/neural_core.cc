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

#include "contrastmap/neural_core.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "contrastmap/errors.h"
#include "contrastmap/random.h"

namespace contrastmap {
namespace {

double Activate(Activation activation, double z) {
  return activation == Activation::kTanh ? std::tanh(z) : (z > 0.0 ? z : 0.0);
}

// Derivative expressed through the activation's output.
double ActivationSlope(Activation activation, double a) {
  return activation == Activation::kTanh ? 1.0 - a * a : (a > 0.0 ? 1.0 : 0.0);
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// y = W x + b
void Affine(const Matrix& w, std::span<const double> b, std::span<const double> x, std::vector<double>& y) {
  y.resize(w.rows());
  for (size_t r = 0; r < w.rows(); ++r) y[r] = b[r] + Dot(w.row(r), x);
}

// Adds d cos(u, v) / du * scale into du_out.
void AddCosineGradient(std::span<const double> u, std::span<const double> v, double scale,
                       std::span<double> du_out) {
  const double norm_u_raw = std::sqrt(Dot(u, u));
  const double norm_u = std::max(norm_u_raw, kCosineEpsilon);
  const double norm_v = std::max(std::sqrt(Dot(v, v)), kCosineEpsilon);
  const double cosine = Dot(u, v) / (norm_u * norm_v);
  const double a = scale / (norm_u * norm_v);
  // Below the floor the norm is a constant, so only the first term remains.
  const double b = norm_u_raw > kCosineEpsilon ? scale * cosine / (norm_u * norm_u) : 0.0;
  for (size_t i = 0; i < u.size(); ++i) du_out[i] += a * v[i] - b * u[i];
}

void CheckInput(const MlpParams& params, std::span<const double> x) {
  if (params.weights.empty()) throw InputError("empty network");
  if (x.size() != params.input_dim()) {
    throw InputError("dimension mismatch: network expects " + std::to_string(params.input_dim()) + ", got " +
                     std::to_string(x.size()));
  }
}

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double Softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

std::string_view ActivationName(Activation activation) {
  return activation == Activation::kTanh ? "tanh" : "relu";
}

Activation ParseActivation(std::string_view name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  throw InputError("unknown activation: " + std::string(name));
}

size_t MlpParams::ParameterCount() const {
  size_t n = 0;
  for (size_t l = 0; l < weights.size(); ++l) n += weights[l].data().size() + biases[l].size();
  return n;
}

MlpParams MlpParams::ZerosLike() const {
  MlpParams z;
  z.layer_dims = layer_dims;
  z.hidden_activation = hidden_activation;
  for (size_t l = 0; l < weights.size(); ++l) {
    z.weights.emplace_back(weights[l].rows(), weights[l].cols());
    z.biases.emplace_back(biases[l].size(), 0.0);
  }
  return z;
}

std::vector<std::span<double>> MlpParams::Buffers() {
  std::vector<std::span<double>> out;
  for (size_t l = 0; l < weights.size(); ++l) {
    out.emplace_back(weights[l].data());
    out.emplace_back(biases[l]);
  }
  return out;
}

std::vector<std::span<const double>> MlpParams::Buffers() const {
  std::vector<std::span<const double>> out;
  for (size_t l = 0; l < weights.size(); ++l) {
    out.emplace_back(weights[l].data());
    out.emplace_back(biases[l]);
  }
  return out;
}

std::vector<double> MlpParams::Flatten() const {
  std::vector<double> flat;
  flat.reserve(ParameterCount());
  for (auto buffer : Buffers()) flat.insert(flat.end(), buffer.begin(), buffer.end());
  return flat;
}

void MlpParams::Unflatten(std::span<const double> flat) {
  if (flat.size() != ParameterCount()) throw InputError("Unflatten: size mismatch");
  size_t offset = 0;
  for (auto buffer : Buffers()) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), buffer.size(), buffer.begin());
    offset += buffer.size();
  }
}

void MlpParams::Validate() const {
  if (layer_dims.size() < 2) throw InputError("model needs at least two layer dimensions");
  for (size_t d : layer_dims) {
    if (d == 0) throw InputError("layer dimensions must be positive");
  }
  if (weights.size() != layer_dims.size() - 1 || biases.size() != weights.size()) {
    throw InputError("layer count does not match layer_dims");
  }
  for (size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != layer_dims[l + 1] || weights[l].cols() != layer_dims[l] ||
        weights[l].data().size() != layer_dims[l + 1] * layer_dims[l]) {
      throw InputError("weight shape mismatch in layer " + std::to_string(l));
    }
    if (biases[l].size() != layer_dims[l + 1]) throw InputError("bias shape mismatch in layer " + std::to_string(l));
  }
  for (auto buffer : Buffers()) {
    for (double v : buffer) {
      if (!std::isfinite(v)) throw InputError("non-finite model parameter");
    }
  }
}

MlpParams InitParams(std::span<const size_t> layer_dims, Activation hidden_activation, uint64_t seed) {
  MlpParams params;
  params.layer_dims.assign(layer_dims.begin(), layer_dims.end());
  params.hidden_activation = hidden_activation;
  if (params.layer_dims.size() < 2) throw InputError("model needs at least two layer dimensions");
  for (size_t d : params.layer_dims) {
    if (d == 0) throw InputError("layer dimensions must be positive");
  }
  if (params.layer_dims.back() >= params.layer_dims.front()) throw InputError("not a contraction");

  Rng rng(seed);
  for (size_t l = 0; l + 1 < params.layer_dims.size(); ++l) {
    const size_t fan_in = params.layer_dims[l];
    const size_t fan_out = params.layer_dims[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(fan_out, fan_in);
    for (double& v : w.data()) v = rng.Uniform(-bound, bound);
    params.weights.push_back(std::move(w));
    params.biases.emplace_back(fan_out, 0.0);
  }
  return params;
}

ForwardTrace ForwardWithTrace(const MlpParams& params, std::span<const double> x) {
  CheckInput(params, x);
  ForwardTrace trace;
  trace.activations.reserve(params.num_layers() + 1);
  trace.activations.emplace_back(x.begin(), x.end());
  for (size_t l = 0; l < params.num_layers(); ++l) {
    std::vector<double> next;
    Affine(params.weights[l], params.biases[l], trace.activations.back(), next);
    if (l + 1 < params.num_layers()) {
      for (double& v : next) v = Activate(params.hidden_activation, v);
    }
    trace.activations.push_back(std::move(next));
  }
  return trace;
}

std::vector<double> Forward(const MlpParams& params, std::span<const double> x) {
  CheckInput(params, x);
  std::vector<double> current(x.begin(), x.end());
  std::vector<double> next;
  for (size_t l = 0; l < params.num_layers(); ++l) {
    Affine(params.weights[l], params.biases[l], current, next);
    if (l + 1 < params.num_layers()) {
      for (double& v : next) v = Activate(params.hidden_activation, v);
    }
    current.swap(next);
  }
  return current;
}

void Backward(const MlpParams& params, const ForwardTrace& trace, std::span<const double> output_grad,
              MlpParams& grad, std::span<double> input_grad) {
  const size_t layers = params.num_layers();
  std::vector<double> delta(output_grad.begin(), output_grad.end());
  std::vector<double> previous;
  for (size_t l = layers; l-- > 0;) {
    const Matrix& w = params.weights[l];
    const std::vector<double>& input = trace.activations[l];
    Matrix& gw = grad.weights[l];
    std::vector<double>& gb = grad.biases[l];
    for (size_t r = 0; r < w.rows(); ++r) {
      const double d = delta[r];
      gb[r] += d;
      if (d == 0.0) continue;
      auto grow = gw.row(r);
      for (size_t c = 0; c < w.cols(); ++c) grow[c] += d * input[c];
    }
    const bool need_previous = l > 0 || !input_grad.empty();
    if (!need_previous) break;
    previous.assign(w.cols(), 0.0);
    for (size_t r = 0; r < w.rows(); ++r) {
      const double d = delta[r];
      if (d == 0.0) continue;
      auto wrow = w.row(r);
      for (size_t c = 0; c < w.cols(); ++c) previous[c] += wrow[c] * d;
    }
    if (l > 0) {
      for (size_t c = 0; c < previous.size(); ++c) previous[c] *= ActivationSlope(params.hidden_activation, input[c]);
    } else {
      std::copy(previous.begin(), previous.end(), input_grad.begin());
    }
    delta.swap(previous);
  }
}

double GuardedCosine(std::span<const double> u, std::span<const double> v) {
  const double norm_u = std::max(std::sqrt(Dot(u, u)), kCosineEpsilon);
  const double norm_v = std::max(std::sqrt(Dot(v, v)), kCosineEpsilon);
  return Dot(u, v) / (norm_u * norm_v);
}

double TripletLoss(const MlpParams& params, const TripletBatch& batch) {
  if (batch.size() == 0) throw InputError("empty triplet batch");
  double total = 0.0;
  for (size_t i = 0; i < batch.size(); ++i) {
    const auto fw = Forward(params, batch.anchors[i]);
    const auto fs = Forward(params, batch.synonyms[i]);
    const auto fa = Forward(params, batch.antonyms[i]);
    total += (1.0 - GuardedCosine(fw, fs)) + (1.0 + GuardedCosine(fw, fa));
  }
  return total / static_cast<double>(batch.size());
}

LossAndGradient TripletBackward(const MlpParams& params, const TripletBatch& batch) {
  if (batch.size() == 0) throw InputError("empty triplet batch");
  LossAndGradient out;
  out.gradient = params.ZerosLike();
  const double scale = 1.0 / static_cast<double>(batch.size());
  const size_t k = params.output_dim();
  std::vector<double> dw(k), ds(k), da(k);
  double total = 0.0;
  for (size_t i = 0; i < batch.size(); ++i) {
    const ForwardTrace tw = ForwardWithTrace(params, batch.anchors[i]);
    const ForwardTrace ts = ForwardWithTrace(params, batch.synonyms[i]);
    const ForwardTrace ta = ForwardWithTrace(params, batch.antonyms[i]);
    const auto& fw = tw.activations.back();
    const auto& fs = ts.activations.back();
    const auto& fa = ta.activations.back();
    total += (1.0 - GuardedCosine(fw, fs)) + (1.0 + GuardedCosine(fw, fa));

    std::fill(dw.begin(), dw.end(), 0.0);
    std::fill(ds.begin(), ds.end(), 0.0);
    std::fill(da.begin(), da.end(), 0.0);
    AddCosineGradient(fw, fs, -scale, dw);
    AddCosineGradient(fw, fa, scale, dw);
    AddCosineGradient(fs, fw, -scale, ds);
    AddCosineGradient(fa, fw, scale, da);
    Backward(params, tw, dw, out.gradient);
    Backward(params, ts, ds, out.gradient);
    Backward(params, ta, da, out.gradient);
  }
  out.loss = total * scale;
  return out;
}

AdamState AdamState::For(const MlpParams& params, AdamConfig config) {
  AdamState state;
  state.config = config;
  state.first_moment = params.ZerosLike();
  state.second_moment = params.ZerosLike();
  return state;
}

void AdamStep(MlpParams& params, const MlpParams& grad, AdamState& state) {
  auto p = params.Buffers();
  auto g = grad.Buffers();
  auto m = state.first_moment.Buffers();
  auto v = state.second_moment.Buffers();
  if (p.size() != g.size() || p.size() != m.size() || p.size() != v.size()) {
    throw InputError("optimizer shape mismatch");
  }
  for (size_t b = 0; b < p.size(); ++b) {
    if (p[b].size() != g[b].size() || p[b].size() != m[b].size() || p[b].size() != v[b].size()) {
      throw InputError("optimizer shape mismatch");
    }
    for (double x : g[b]) {
      if (!std::isfinite(x)) throw NumericError("diverged");
    }
  }

  const AdamConfig& c = state.config;
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (size_t b = 0; b < p.size(); ++b) {
    for (size_t i = 0; i < p[b].size(); ++i) {
      const double gi = g[b][i];
      m[b][i] = c.beta1 * m[b][i] + (1.0 - c.beta1) * gi;
      v[b][i] = c.beta2 * v[b][i] + (1.0 - c.beta2) * gi * gi;
      const double m_hat = m[b][i] / correction1;
      const double v_hat = v[b][i] / correction2;
      p[b][i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

double PairHeadForward(const MlpParams& head, std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size() || u.size() + v.size() != head.input_dim()) {
    throw InputError("pair head dimension mismatch");
  }
  if (head.output_dim() != 1) throw InputError("pair head must have a scalar output");
  std::vector<double> joined(u.begin(), u.end());
  joined.insert(joined.end(), v.begin(), v.end());
  return Sigmoid(Forward(head, joined)[0]);
}

double PairHeadBceBackward(const MlpParams& head, std::span<const double> u, std::span<const double> v, double label,
                           double weight, MlpParams& head_grad, std::span<double> grad_u, std::span<double> grad_v) {
  if (u.size() != v.size() || u.size() + v.size() != head.input_dim()) {
    throw InputError("pair head dimension mismatch");
  }
  if (head.output_dim() != 1) throw InputError("pair head must have a scalar output");
  std::vector<double> joined(u.begin(), u.end());
  joined.insert(joined.end(), v.begin(), v.end());
  const ForwardTrace trace = ForwardWithTrace(head, joined);
  const double logit = trace.activations.back()[0];
  const double loss = Softplus(logit) - label * logit;
  const double dlogit = weight * (Sigmoid(logit) - label);

  const bool want_input = !grad_u.empty() || !grad_v.empty();
  std::vector<double> input_grad(want_input ? joined.size() : 0);
  Backward(head, trace, std::span<const double>(&dlogit, 1), head_grad, input_grad);
  if (!grad_u.empty()) {
    for (size_t i = 0; i < u.size(); ++i) grad_u[i] += input_grad[i];
  }
  if (!grad_v.empty()) {
    for (size_t i = 0; i < v.size(); ++i) grad_v[i] += input_grad[u.size() + i];
  }
  return weight * loss;
}

nlohmann::json ModelToJson(const MlpParams& params) {
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["layer_dims"] = params.layer_dims;
  j["hidden_activation"] = std::string(ActivationName(params.hidden_activation));
  j["weights"] = nlohmann::json::array();
  j["biases"] = nlohmann::json::array();
  for (size_t l = 0; l < params.num_layers(); ++l) {
    j["weights"].push_back(params.weights[l].data());
    j["biases"].push_back(params.biases[l]);
  }
  return j;
}

MlpParams ModelFromJson(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != kModelFormatVersion) throw InputError("unsupported model format_version");
    MlpParams params;
    params.layer_dims = j.at("layer_dims").get<std::vector<size_t>>();
    params.hidden_activation = ParseActivation(j.at("hidden_activation").get<std::string>());
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    if (params.layer_dims.size() < 2 || weights.size() != params.layer_dims.size() - 1 ||
        biases.size() != weights.size()) {
      throw InputError("model layer count mismatch");
    }
    for (size_t l = 0; l < weights.size(); ++l) {
      auto flat = weights[l].get<std::vector<double>>();
      const size_t rows = params.layer_dims[l + 1];
      const size_t cols = params.layer_dims[l];
      if (flat.size() != rows * cols) throw InputError("weight shape mismatch in layer " + std::to_string(l));
      Matrix w(rows, cols);
      w.data() = std::move(flat);
      params.weights.push_back(std::move(w));
      params.biases.push_back(biases[l].get<std::vector<double>>());
    }
    params.Validate();
    return params;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed model JSON: ") + e.what());
  }
}

void SaveModelFile(const MlpParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open for writing: " + path);
  out << ModelToJson(params).dump(1) << '\n';
  if (!out) throw std::ios_base::failure("model write failed");
}

MlpParams LoadModelFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed model JSON: ") + e.what());
  }
  return ModelFromJson(j);
}

}  // namespace contrastmap
