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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "contrastmap/classifiers.h"
#include "contrastmap/errors.h"

namespace contrastmap {
namespace {

struct SortedEntry {
  double value;
  uint32_t row;
};

// Per-node gradient statistics while one feature column is swept.
struct SweepState {
  double grad_left = 0.0;
  double hess_left = 0.0;
  double last_value = 0.0;
  size_t count_left = 0;
};

struct SplitCandidate {
  double gain = -std::numeric_limits<double>::infinity();
  int feature = -1;
  double threshold = 0.0;
};

struct NodeTotals {
  double grad = 0.0;
  double hess = 0.0;
  size_t count = 0;
};

double LeafScore(double g, double h, double lambda) { return g * g / (h + lambda); }

double Midpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  // Adjacent doubles: the midpoint may round up to `hi`.
  return mid < hi ? mid : lo;
}

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double Softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double MeanLoss(std::span<const double> scores, std::span<const int> labels) {
  double total = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) total += Softplus(scores[i]) - static_cast<double>(labels[i]) * scores[i];
  return total / static_cast<double>(scores.size());
}

class TreeGrower {
 public:
  TreeGrower(const std::vector<std::vector<SortedEntry>>& columns, const BoostConfig& config)
      : columns_(columns), config_(config) {}

  RegressionTree Grow(std::span<const double> grad, std::span<const double> hess, std::vector<int>& node_of) {
    const size_t n = grad.size();
    RegressionTree tree;
    tree.nodes.emplace_back();
    std::fill(node_of.begin(), node_of.end(), 0);

    std::vector<int> frontier = {0};
    for (size_t depth = 0; !frontier.empty(); ++depth) {
      // Totals per frontier node.
      std::vector<int> slot_of_node(tree.nodes.size(), -1);
      for (size_t s = 0; s < frontier.size(); ++s) slot_of_node[static_cast<size_t>(frontier[s])] = static_cast<int>(s);
      std::vector<NodeTotals> totals(frontier.size());
      for (size_t i = 0; i < n; ++i) {
        const int slot = slot_of_node[static_cast<size_t>(node_of[i])];
        if (slot < 0) continue;
        auto& t = totals[static_cast<size_t>(slot)];
        t.grad += grad[i];
        t.hess += hess[i];
        ++t.count;
      }

      std::vector<SplitCandidate> best(frontier.size());
      if (depth < config_.max_depth) {
        std::vector<SweepState> sweep(frontier.size());
        for (size_t f = 0; f < columns_.size(); ++f) {
          std::fill(sweep.begin(), sweep.end(), SweepState{});
          for (const SortedEntry& e : columns_[f]) {
            const int slot = slot_of_node[static_cast<size_t>(node_of[e.row])];
            if (slot < 0) continue;
            SweepState& st = sweep[static_cast<size_t>(slot)];
            if (st.count_left > 0 && e.value > st.last_value) {
              const NodeTotals& t = totals[static_cast<size_t>(slot)];
              const double gain = LeafScore(st.grad_left, st.hess_left, config_.l2_leaf) +
                                  LeafScore(t.grad - st.grad_left, t.hess - st.hess_left, config_.l2_leaf) -
                                  LeafScore(t.grad, t.hess, config_.l2_leaf);
              SplitCandidate& b = best[static_cast<size_t>(slot)];
              if (gain > b.gain) {
                b.gain = gain;
                b.feature = static_cast<int>(f);
                b.threshold = Midpoint(st.last_value, e.value);
              }
            }
            st.grad_left += grad[e.row];
            st.hess_left += hess[e.row];
            st.last_value = e.value;
            ++st.count_left;
          }
        }
      }

      std::vector<int> next;
      for (size_t s = 0; s < frontier.size(); ++s) {
        const size_t id = static_cast<size_t>(frontier[s]);
        const SplitCandidate& b = best[s];
        if (b.feature >= 0 && b.gain >= config_.min_split_gain) {
          const int left = static_cast<int>(tree.nodes.size());
          tree.nodes.emplace_back();
          tree.nodes.emplace_back();
          tree.nodes[id].feature = b.feature;
          tree.nodes[id].threshold = b.threshold;
          tree.nodes[id].left = left;
          tree.nodes[id].right = left + 1;
          next.push_back(left);
          next.push_back(left + 1);
        } else {
          tree.nodes[id].value = -totals[s].grad / (totals[s].hess + config_.l2_leaf);
        }
      }
      if (next.empty()) break;
      // Route samples of the nodes that split.
      for (size_t i = 0; i < n; ++i) {
        const auto& node = tree.nodes[static_cast<size_t>(node_of[i])];
        if (node.feature < 0) continue;
        const double x = ValueOf(static_cast<size_t>(node.feature), static_cast<uint32_t>(i));
        node_of[i] = x <= node.threshold ? node.left : node.right;
      }
      frontier = std::move(next);
    }
    return tree;
  }

  void SetRowValues(const Matrix* features) { features_ = features; }

 private:
  double ValueOf(size_t feature, uint32_t row) const { return (*features_)(row, feature); }

  const std::vector<std::vector<SortedEntry>>& columns_;
  const BoostConfig& config_;
  const Matrix* features_ = nullptr;
};

}  // namespace

PairClassifierModel TrainBoosted(const Matrix& features, std::span<const int> labels, const BoostConfig& config,
                                 std::vector<double>* loss_history) {
  if (features.rows() != labels.size()) throw InputError("feature/label count mismatch");
  if (config.rounds < 1) throw InputError("rounds must be at least 1");
  if (!(config.shrinkage > 0.0)) throw InputError("shrinkage must be positive");
  if (features.rows() > std::numeric_limits<uint32_t>::max()) throw InputError("too many rows");
  size_t positives = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw InputError("labels must be 0 or 1");
    positives += static_cast<size_t>(y);
  }
  const size_t n = features.rows();
  if (n == 0 || positives == 0 || positives == n) throw InputError("single-class training data");

  PairClassifierModel model;
  model.kind = ClassifierKind::kBoostedTrees;
  model.feature_dimension = features.cols();
  model.shrinkage = config.shrinkage;
  model.base_score = std::log(static_cast<double>(positives) / static_cast<double>(n - positives));

  std::vector<std::vector<SortedEntry>> columns(features.cols());
  for (size_t f = 0; f < features.cols(); ++f) {
    auto& col = columns[f];
    col.resize(n);
    for (size_t i = 0; i < n; ++i) col[i] = {features(i, f), static_cast<uint32_t>(i)};
    std::sort(col.begin(), col.end(), [](const SortedEntry& a, const SortedEntry& b) {
      return a.value < b.value || (a.value == b.value && a.row < b.row);
    });
  }

  std::vector<double> scores(n, model.base_score);
  std::vector<double> grad(n), hess(n);
  std::vector<int> node_of(n, 0);
  if (loss_history) {
    loss_history->clear();
    loss_history->push_back(MeanLoss(scores, labels));
  }
  TreeGrower grower(columns, config);
  grower.SetRowValues(&features);
  for (size_t round = 0; round < config.rounds; ++round) {
    for (size_t i = 0; i < n; ++i) {
      const double p = Sigmoid(scores[i]);
      grad[i] = p - static_cast<double>(labels[i]);
      hess[i] = p * (1.0 - p);
    }
    RegressionTree tree = grower.Grow(grad, hess, node_of);
    for (size_t i = 0; i < n; ++i) {
      scores[i] += config.shrinkage * tree.nodes[static_cast<size_t>(node_of[i])].value;
    }
    model.trees.push_back(std::move(tree));
    if (loss_history) loss_history->push_back(MeanLoss(scores, labels));
  }
  return model;
}

}  // namespace contrastmap
