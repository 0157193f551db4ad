/*
 * Copyright 2026 the mdhan authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Reverse-mode automatic differentiation over dense 64-bit tensors.
//
// A Tape is an append-only record of primitive applications; appending order
// is a topological order, so backward() is a single reverse sweep that visits
// each node exactly once. Tensors are Eigen matrices — a "vector" is a column
// (n x 1). Every primitive validates shapes (errors name both shapes) and
// checks its output for non-finite entries, so divergence surfaces at the op
// that produced it rather than later.
//
// A tape is single-threaded; independent tapes may run concurrently.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mdhan::ad {

using NodeId = int;
using ParamMap = std::map<std::string, Eigen::MatrixXd>;

class Tape {
 public:
  // Leaf tensor. Only nodes reachable from requires_grad leaves are
  // differentiated; everything else is treated as constant.
  NodeId input(Eigen::MatrixXd value, bool requires_grad = false);

  const Eigen::MatrixXd& value(NodeId id) const { return nodes_[id].value; }
  bool requires_grad(NodeId id) const { return nodes_[id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // --- primitives -----------------------------------------------------
  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);  // elementwise
  NodeId scale(NodeId a, double c);
  NodeId add_scalar(NodeId a, double c);
  NodeId one_minus(NodeId a);  // 1 - x, the GRU update-gate complement
  NodeId tanh(NodeId a);
  NodeId sigmoid(NodeId a);
  NodeId relu(NodeId a);
  // Column-vector softmax (n x 1 -> n x 1).
  NodeId softmax(NodeId a);
  // Stack column-compatible blocks vertically / row-compatible horizontally.
  NodeId vcat(const std::vector<NodeId>& parts);
  NodeId hcat(const std::vector<NodeId>& parts);
  // Row r of a matrix as a column vector.
  NodeId take_row(NodeId a, Eigen::Index r);
  NodeId transpose(NodeId a);
  NodeId dot(NodeId a, NodeId b);  // column vectors -> 1 x 1
  NodeId sum(NodeId a);            // all entries -> 1 x 1
  NodeId mean(NodeId a);           // all entries -> 1 x 1
  // Non-overlapping max over groups of `window` columns (last group may be
  // narrower). Backward routes to the argmax entry (first on ties).
  NodeId maxpool_cols(NodeId a, Eigen::Index window);
  // Inverted dropout: train-time masks zero entries with probability `rate`
  // and scales survivors by 1/(1-rate); eval-time (train=false) or rate 0 is
  // the identity. The mask is a pure function of (seed, salt).
  NodeId dropout(NodeId a, double rate, bool train, std::uint64_t seed,
                 std::uint64_t salt);
  // Rows of a frozen table gathered as a constant (|ids| x dim) leaf.
  NodeId embedding_lookup(const Eigen::MatrixXd& table, const std::vector<int>& ids);
  // Binary cross-entropy of a 1x1 prediction against label y in {0,1};
  // the prediction is clamped to [1e-12, 1-1e-12] before the logs.
  NodeId bce_loss(NodeId yhat, double y);

  // --- gradients --------------------------------------------------------
  // Reverse sweep from a scalar loss. May be called repeatedly on a tape
  // (each call recomputes gradients from scratch).
  void backward(NodeId loss);
  // Gradient of the last backward() w.r.t. this node; zeros when the node
  // did not participate.
  Eigen::MatrixXd grad(NodeId id) const;

 private:
  using Vjp = std::function<void(Tape&, const Eigen::MatrixXd&)>;
  struct Node {
    Eigen::MatrixXd value;
    bool requires_grad = false;
    Vjp vjp;  // empty for leaves
  };

  NodeId emit(Eigen::MatrixXd value, bool requires_grad, Vjp vjp, const char* op);
  void accumulate(NodeId id, const Eigen::MatrixXd& g);

  std::vector<Node> nodes_;
  std::vector<Eigen::MatrixXd> grads_;
};

// ---------------------------------------------------------------------------
// optimizer

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam over a named parameter map. Moments are keyed by
// parameter name and created lazily with matching shapes.
class AdamState {
 public:
  explicit AdamState(AdamConfig cfg = {}) : cfg_(cfg) {}

  const AdamConfig& config() const { return cfg_; }
  std::int64_t steps() const { return t_; }

  // In-place update; every parameter must have a gradient of equal shape.
  void step(ParamMap& params, const ParamMap& grads);

 private:
  AdamConfig cfg_;
  std::int64_t t_ = 0;
  ParamMap m_, v_;
};

// ---------------------------------------------------------------------------
// finite-difference verification

struct GradCheckOptions {
  double step = 1e-5;           // central-difference h
  int samples_per_tensor = 4;   // coordinates probed per parameter
  std::uint64_t seed = 0;       // which coordinates get probed
};

struct GradCheckReport {
  double max_rel_err = 0.0;
  int coords_checked = 0;
  bool deterministic = true;  // loss(params) stable across two evaluations
  std::string worst_param;
  Eigen::Index worst_row = 0;
  Eigen::Index worst_col = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
};

// Compares analytic gradients against central finite differences on sampled
// coordinates. `loss` must be a deterministic pure function of the
// parameters (dropout off); if two evaluations disagree the report comes
// back with deterministic=false and an infinite error instead of nonsense
// numbers. Relative error: |a-n| / (|a| + |n| + 1e-4).
GradCheckReport grad_check(const std::function<double(const ParamMap&)>& loss,
                           const std::function<ParamMap(const ParamMap&)>& gradients,
                           const ParamMap& params, const GradCheckOptions& opts = {});

// ---------------------------------------------------------------------------
// initialization

// Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)); fan_in = cols.
Eigen::MatrixXd init_glorot(Eigen::Index rows, Eigen::Index cols,
                            std::mt19937_64& rng);
Eigen::MatrixXd init_uniform(Eigen::Index rows, Eigen::Index cols, double lo,
                             double hi, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// checkpoints

struct Checkpoint {
  ParamMap tensors;
  std::uint64_t config_hash = 0;
};

// Binary container of named tensors (little-endian doubles). Writing the
// same tensors twice produces byte-identical files. The config hash lets
// loaders reject checkpoints taken under a different model configuration.
void save_checkpoint(const std::string& path, const ParamMap& tensors,
                     std::uint64_t config_hash);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace mdhan::ad
