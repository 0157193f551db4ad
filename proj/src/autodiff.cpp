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

#include "mdhan/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "mdhan/errors.hpp"
#include "mdhan/prng.hpp"

namespace mdhan::ad {

namespace {

std::string shape_str(const Eigen::MatrixXd& m) {
  return "(" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ")";
}

void require_same_shape(const char* op, const Eigen::MatrixXd& a,
                        const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw UsageError(std::string(op) + " shape mismatch: " + shape_str(a) + " vs " +
                     shape_str(b));
  }
}

void require_col_vector(const char* op, const Eigen::MatrixXd& a) {
  if (a.cols() != 1 || a.rows() == 0) {
    throw UsageError(std::string(op) + " expects a column vector, got " + shape_str(a));
  }
}

constexpr double kProbFloor = 1e-12;

}  // namespace

// ---------------------------------------------------------------------------
// tape core

NodeId Tape::input(Eigen::MatrixXd value, bool requires_grad) {
  return emit(std::move(value), requires_grad, {}, "input");
}

NodeId Tape::emit(Eigen::MatrixXd value, bool requires_grad, Vjp vjp, const char* op) {
  if (!value.allFinite()) {
    throw NumericError(std::string("non-finite value produced by '") + op + "'");
  }
  nodes_.push_back(Node{std::move(value), requires_grad, std::move(vjp)});
  return static_cast<NodeId>(nodes_.size()) - 1;
}

void Tape::accumulate(NodeId id, const Eigen::MatrixXd& g) {
  if (!nodes_[id].requires_grad) return;
  if (grads_[id].size() == 0) {
    grads_[id] = g;
  } else {
    grads_[id] += g;
  }
}

void Tape::backward(NodeId loss) {
  const auto& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw UsageError("backward requires a scalar loss, got " + shape_str(lv));
  }
  grads_.assign(nodes_.size(), Eigen::MatrixXd());
  grads_[loss] = Eigen::MatrixXd::Ones(1, 1);
  for (NodeId id = loss; id >= 0; --id) {
    if (grads_[id].size() == 0 || !nodes_[id].vjp) continue;
    nodes_[id].vjp(*this, grads_[id]);
  }
}

Eigen::MatrixXd Tape::grad(NodeId id) const {
  if (static_cast<std::size_t>(id) < grads_.size() && grads_[id].size() != 0) {
    return grads_[id];
  }
  return Eigen::MatrixXd::Zero(nodes_[id].value.rows(), nodes_[id].value.cols());
}

// ---------------------------------------------------------------------------
// primitives

NodeId Tape::matmul(NodeId a, NodeId b) {
  const auto& A = value(a);
  const auto& B = value(b);
  if (A.cols() != B.rows()) {
    throw UsageError("matmul shape mismatch: " + shape_str(A) + " vs " + shape_str(B));
  }
  const bool req = requires_grad(a) || requires_grad(b);
  return emit(A * B, req,
              [a, b](Tape& t, const Eigen::MatrixXd& g) {
                t.accumulate(a, g * t.value(b).transpose());
                t.accumulate(b, t.value(a).transpose() * g);
              },
              "matmul");
}

NodeId Tape::add(NodeId a, NodeId b) {
  const auto& A = value(a);
  const auto& B = value(b);
  require_same_shape("add", A, B);
  return emit(A + B, requires_grad(a) || requires_grad(b),
              [a, b](Tape& t, const Eigen::MatrixXd& g) {
                t.accumulate(a, g);
                t.accumulate(b, g);
              },
              "add");
}

NodeId Tape::sub(NodeId a, NodeId b) {
  const auto& A = value(a);
  const auto& B = value(b);
  require_same_shape("sub", A, B);
  return emit(A - B, requires_grad(a) || requires_grad(b),
              [a, b](Tape& t, const Eigen::MatrixXd& g) {
                t.accumulate(a, g);
                t.accumulate(b, -g);
              },
              "sub");
}

NodeId Tape::mul(NodeId a, NodeId b) {
  const auto& A = value(a);
  const auto& B = value(b);
  require_same_shape("mul", A, B);
  return emit(A.cwiseProduct(B), requires_grad(a) || requires_grad(b),
              [a, b](Tape& t, const Eigen::MatrixXd& g) {
                t.accumulate(a, g.cwiseProduct(t.value(b)));
                t.accumulate(b, g.cwiseProduct(t.value(a)));
              },
              "mul");
}

NodeId Tape::scale(NodeId a, double c) {
  return emit(value(a) * c, requires_grad(a),
              [a, c](Tape& t, const Eigen::MatrixXd& g) { t.accumulate(a, g * c); },
              "scale");
}

NodeId Tape::add_scalar(NodeId a, double c) {
  return emit((value(a).array() + c).matrix(), requires_grad(a),
              [a](Tape& t, const Eigen::MatrixXd& g) { t.accumulate(a, g); },
              "add_scalar");
}

NodeId Tape::one_minus(NodeId a) {
  return emit((1.0 - value(a).array()).matrix(), requires_grad(a),
              [a](Tape& t, const Eigen::MatrixXd& g) { t.accumulate(a, -g); },
              "one_minus");
}

NodeId Tape::tanh(NodeId a) {
  Eigen::MatrixXd y = value(a).array().tanh().matrix();
  NodeId out = emit(std::move(y), requires_grad(a), {}, "tanh");
  nodes_[out].vjp = [a, out](Tape& t, const Eigen::MatrixXd& g) {
    const auto& y2 = t.value(out).array();
    t.accumulate(a, (g.array() * (1.0 - y2 * y2)).matrix());
  };
  return out;
}

NodeId Tape::sigmoid(NodeId a) {
  Eigen::MatrixXd y = (1.0 / (1.0 + (-value(a).array()).exp())).matrix();
  NodeId out = emit(std::move(y), requires_grad(a), {}, "sigmoid");
  nodes_[out].vjp = [a, out](Tape& t, const Eigen::MatrixXd& g) {
    const auto& s = t.value(out).array();
    t.accumulate(a, (g.array() * s * (1.0 - s)).matrix());
  };
  return out;
}

NodeId Tape::relu(NodeId a) {
  return emit(value(a).cwiseMax(0.0), requires_grad(a),
              [a](Tape& t, const Eigen::MatrixXd& g) {
                t.accumulate(
                    a, (g.array() * (t.value(a).array() > 0.0).cast<double>()).matrix());
              },
              "relu");
}

NodeId Tape::softmax(NodeId a) {
  const auto& A = value(a);
  require_col_vector("softmax", A);
  Eigen::ArrayXd shifted = A.col(0).array() - A.col(0).maxCoeff();
  Eigen::ArrayXd e = shifted.exp();
  Eigen::MatrixXd y = (e / e.sum()).matrix();
  NodeId out = emit(std::move(y), requires_grad(a), {}, "softmax");
  nodes_[out].vjp = [a, out](Tape& t, const Eigen::MatrixXd& g) {
    const Eigen::ArrayXd y2 = t.value(out).col(0).array();
    const Eigen::ArrayXd ga = g.col(0).array();
    const double inner = (ga * y2).sum();
    t.accumulate(a, ((ga - inner) * y2).matrix());
  };
  return out;
}

NodeId Tape::vcat(const std::vector<NodeId>& parts) {
  if (parts.empty()) throw UsageError("vcat of zero tensors");
  const Eigen::Index cols = value(parts[0]).cols();
  Eigen::Index rows = 0;
  bool req = false;
  for (NodeId p : parts) {
    if (value(p).cols() != cols) {
      throw UsageError("vcat column mismatch: " + shape_str(value(parts[0])) + " vs " +
                       shape_str(value(p)));
    }
    rows += value(p).rows();
    req = req || requires_grad(p);
  }
  Eigen::MatrixXd out(rows, cols);
  Eigen::Index at = 0;
  for (NodeId p : parts) {
    out.middleRows(at, value(p).rows()) = value(p);
    at += value(p).rows();
  }
  return emit(std::move(out), req,
              [parts](Tape& t, const Eigen::MatrixXd& g) {
                Eigen::Index at2 = 0;
                for (NodeId p : parts) {
                  const Eigen::Index r = t.value(p).rows();
                  t.accumulate(p, g.middleRows(at2, r));
                  at2 += r;
                }
              },
              "vcat");
}

NodeId Tape::hcat(const std::vector<NodeId>& parts) {
  if (parts.empty()) throw UsageError("hcat of zero tensors");
  const Eigen::Index rows = value(parts[0]).rows();
  Eigen::Index cols = 0;
  bool req = false;
  for (NodeId p : parts) {
    if (value(p).rows() != rows) {
      throw UsageError("hcat row mismatch: " + shape_str(value(parts[0])) + " vs " +
                       shape_str(value(p)));
    }
    cols += value(p).cols();
    req = req || requires_grad(p);
  }
  Eigen::MatrixXd out(rows, cols);
  Eigen::Index at = 0;
  for (NodeId p : parts) {
    out.middleCols(at, value(p).cols()) = value(p);
    at += value(p).cols();
  }
  return emit(std::move(out), req,
              [parts](Tape& t, const Eigen::MatrixXd& g) {
                Eigen::Index at2 = 0;
                for (NodeId p : parts) {
                  const Eigen::Index c = t.value(p).cols();
                  t.accumulate(p, g.middleCols(at2, c));
                  at2 += c;
                }
              },
              "hcat");
}

NodeId Tape::transpose(NodeId a) {
  return emit(value(a).transpose(), requires_grad(a),
              [a](Tape& t, const Eigen::MatrixXd& g) {
                t.accumulate(a, g.transpose());
              },
              "transpose");
}

NodeId Tape::take_row(NodeId a, Eigen::Index r) {
  const auto& A = value(a);
  if (r < 0 || r >= A.rows()) {
    throw UsageError("take_row index " + std::to_string(r) + " outside " + shape_str(A));
  }
  return emit(A.row(r).transpose(), requires_grad(a),
              [a, r](Tape& t, const Eigen::MatrixXd& g) {
                Eigen::MatrixXd ga =
                    Eigen::MatrixXd::Zero(t.value(a).rows(), t.value(a).cols());
                ga.row(r) = g.transpose();
                t.accumulate(a, ga);
              },
              "take_row");
}

NodeId Tape::dot(NodeId a, NodeId b) {
  const auto& A = value(a);
  const auto& B = value(b);
  require_col_vector("dot", A);
  require_same_shape("dot", A, B);
  Eigen::MatrixXd out(1, 1);
  out(0, 0) = A.col(0).dot(B.col(0));
  return emit(std::move(out), requires_grad(a) || requires_grad(b),
              [a, b](Tape& t, const Eigen::MatrixXd& g) {
                t.accumulate(a, g(0, 0) * t.value(b));
                t.accumulate(b, g(0, 0) * t.value(a));
              },
              "dot");
}

NodeId Tape::sum(NodeId a) {
  Eigen::MatrixXd out(1, 1);
  out(0, 0) = value(a).sum();
  return emit(std::move(out), requires_grad(a),
              [a](Tape& t, const Eigen::MatrixXd& g) {
                t.accumulate(a, Eigen::MatrixXd::Constant(t.value(a).rows(),
                                                          t.value(a).cols(), g(0, 0)));
              },
              "sum");
}

NodeId Tape::mean(NodeId a) {
  const double n = static_cast<double>(value(a).size());
  if (n == 0) throw UsageError("mean of an empty tensor");
  Eigen::MatrixXd out(1, 1);
  out(0, 0) = value(a).sum() / n;
  return emit(std::move(out), requires_grad(a),
              [a, n](Tape& t, const Eigen::MatrixXd& g) {
                t.accumulate(a, Eigen::MatrixXd::Constant(
                                    t.value(a).rows(), t.value(a).cols(), g(0, 0) / n));
              },
              "mean");
}

NodeId Tape::maxpool_cols(NodeId a, Eigen::Index window) {
  const auto& A = value(a);
  if (window < 1) throw UsageError("maxpool window must be >= 1");
  const Eigen::Index groups = (A.cols() + window - 1) / window;
  Eigen::MatrixXd out(A.rows(), groups);
  // argmax column per (row, group), first on ties
  std::vector<Eigen::Index> arg(static_cast<std::size_t>(A.rows() * groups));
  for (Eigen::Index gcol = 0; gcol < groups; ++gcol) {
    const Eigen::Index begin = gcol * window;
    const Eigen::Index end = std::min(begin + window, A.cols());
    for (Eigen::Index r = 0; r < A.rows(); ++r) {
      Eigen::Index best = begin;
      for (Eigen::Index c = begin + 1; c < end; ++c) {
        if (A(r, c) > A(r, best)) best = c;
      }
      out(r, gcol) = A(r, best);
      arg[static_cast<std::size_t>(r * groups + gcol)] = best;
    }
  }
  return emit(std::move(out), requires_grad(a),
              [a, groups, arg](Tape& t, const Eigen::MatrixXd& g) {
                Eigen::MatrixXd ga =
                    Eigen::MatrixXd::Zero(t.value(a).rows(), t.value(a).cols());
                for (Eigen::Index r = 0; r < g.rows(); ++r) {
                  for (Eigen::Index gcol = 0; gcol < groups; ++gcol) {
                    ga(r, arg[static_cast<std::size_t>(r * groups + gcol)]) +=
                        g(r, gcol);
                  }
                }
                t.accumulate(a, ga);
              },
              "maxpool_cols");
}

NodeId Tape::dropout(NodeId a, double rate, bool train, std::uint64_t seed,
                     std::uint64_t salt) {
  if (rate < 0.0 || rate >= 1.0) {
    throw UsageError("dropout rate must lie in [0,1), got " + std::to_string(rate));
  }
  if (!train || rate == 0.0) return a;  // identity, no node emitted
  const auto& A = value(a);
  auto rng = make_engine(seed, "dropout", salt);
  Eigen::MatrixXd mask(A.rows(), A.cols());
  const double keep_scale = 1.0 / (1.0 - rate);
  for (Eigen::Index r = 0; r < A.rows(); ++r) {
    for (Eigen::Index c = 0; c < A.cols(); ++c) {
      mask(r, c) = uniform_unit(rng) < rate ? 0.0 : keep_scale;
    }
  }
  return emit(A.cwiseProduct(mask), requires_grad(a),
              [a, mask](Tape& t, const Eigen::MatrixXd& g) {
                t.accumulate(a, g.cwiseProduct(mask));
              },
              "dropout");
}

NodeId Tape::embedding_lookup(const Eigen::MatrixXd& table,
                              const std::vector<int>& ids) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(ids.size()), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= table.rows()) {
      throw UsageError("embedding id " + std::to_string(ids[i]) + " outside table " +
                       shape_str(table));
    }
    out.row(static_cast<Eigen::Index>(i)) = table.row(ids[i]);
  }
  // The table is frozen: this is a constant leaf and never receives gradient.
  return emit(std::move(out), false, {}, "embedding_lookup");
}

NodeId Tape::bce_loss(NodeId yhat, double y) {
  const auto& Y = value(yhat);
  if (Y.rows() != 1 || Y.cols() != 1) {
    throw UsageError("bce_loss expects a 1x1 prediction, got " + shape_str(Y));
  }
  if (y != 0.0 && y != 1.0) {
    throw UsageError("bce_loss label must be 0 or 1, got " + std::to_string(y));
  }
  const double raw = Y(0, 0);
  const double p = std::clamp(raw, kProbFloor, 1.0 - kProbFloor);
  Eigen::MatrixXd out(1, 1);
  out(0, 0) = -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
  const bool clamped = raw != p;
  return emit(std::move(out), requires_grad(yhat),
              [yhat, y, p, clamped](Tape& t, const Eigen::MatrixXd& g) {
                if (clamped) return;  // flat outside the clamp interval
                Eigen::MatrixXd ga(1, 1);
                ga(0, 0) = g(0, 0) * (-(y / p) + (1.0 - y) / (1.0 - p));
                t.accumulate(yhat, ga);
              },
              "bce_loss");
}

// ---------------------------------------------------------------------------
// Adam

void AdamState::step(ParamMap& params, const ParamMap& grads) {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (auto& [name, p] : params) {
    auto git = grads.find(name);
    if (git == grads.end()) {
      throw UsageError("adam step: no gradient for parameter '" + name + "'");
    }
    const Eigen::MatrixXd& g = git->second;
    require_same_shape("adam step", p, g);
    auto& m = m_[name];
    auto& v = v_[name];
    if (m.size() == 0) {
      m = Eigen::MatrixXd::Zero(p.rows(), p.cols());
      v = Eigen::MatrixXd::Zero(p.rows(), p.cols());
    }
    m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
    v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    const Eigen::ArrayXXd mhat = m.array() / bc1;
    const Eigen::ArrayXXd vhat = v.array() / bc2;
    p.array() -= cfg_.lr * mhat / (vhat.sqrt() + cfg_.eps);
    if (!p.allFinite()) {
      throw NumericError("adam step produced non-finite values in '" + name + "'");
    }
  }
}

// ---------------------------------------------------------------------------
// gradient check

GradCheckReport grad_check(const std::function<double(const ParamMap&)>& loss,
                           const std::function<ParamMap(const ParamMap&)>& gradients,
                           const ParamMap& params, const GradCheckOptions& opts) {
  GradCheckReport report;

  const double l1 = loss(params);
  const double l2 = loss(params);
  if (l1 != l2) {
    report.deterministic = false;
    report.max_rel_err = std::numeric_limits<double>::infinity();
    return report;
  }

  const ParamMap analytic = gradients(params);
  ParamMap probe = params;
  auto rng = make_engine(opts.seed, "grad-check");

  for (const auto& [name, tensor] : params) {
    auto ait = analytic.find(name);
    if (ait == analytic.end()) {
      throw UsageError("grad check: no analytic gradient for '" + name + "'");
    }
    const Eigen::MatrixXd& ga = ait->second;
    require_same_shape("grad check", tensor, ga);

    const auto total = static_cast<std::uint64_t>(tensor.size());
    const auto want = std::min<std::uint64_t>(
        total, static_cast<std::uint64_t>(opts.samples_per_tensor));
    for (std::uint64_t s = 0; s < want; ++s) {
      const auto flat = static_cast<Eigen::Index>(uniform_below(rng, total));
      const Eigen::Index r = flat / tensor.cols();
      const Eigen::Index c = flat % tensor.cols();

      Eigen::MatrixXd& t = probe[name];
      const double keep = t(r, c);
      t(r, c) = keep + opts.step;
      const double up = loss(probe);
      t(r, c) = keep - opts.step;
      const double down = loss(probe);
      t(r, c) = keep;

      const double numeric = (up - down) / (2.0 * opts.step);
      const double a = ga(r, c);
      const double rel = std::abs(a - numeric) / (std::abs(a) + std::abs(numeric) + 1e-4);
      ++report.coords_checked;
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = name;
        report.worst_row = r;
        report.worst_col = c;
        report.analytic_at_worst = a;
        report.numeric_at_worst = numeric;
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// initialization

Eigen::MatrixXd init_glorot(Eigen::Index rows, Eigen::Index cols,
                            std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  return init_uniform(rows, cols, -a, a, rng);
}

Eigen::MatrixXd init_uniform(Eigen::Index rows, Eigen::Index cols, double lo, double hi,
                             std::mt19937_64& rng) {
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      out(r, c) = lo + uniform_unit(rng) * (hi - lo);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// checkpoints

namespace {

constexpr char kMagic[8] = {'M', 'D', 'H', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void write_pod(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamMap& tensors,
                     std::uint64_t config_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof kMagic);
  write_pod(out, config_hash);
  write_pod(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, tensor] : tensors) {  // map order: deterministic
    write_pod(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_pod(out, static_cast<std::uint32_t>(tensor.rows()));
    write_pod(out, static_cast<std::uint32_t>(tensor.cols()));
    for (Eigen::Index r = 0; r < tensor.rows(); ++r) {
      for (Eigen::Index c = 0; c < tensor.cols(); ++c) {
        write_pod(out, tensor(r, c));
      }
    }
  }
  if (!out) throw IoError("short write to checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw DataError("not a checkpoint file: " + path);
  }
  Checkpoint ck;
  ck.config_hash = read_pod<std::uint64_t>(in);
  const auto count = read_pod<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = read_pod<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto rows = read_pod<std::uint32_t>(in);
    const auto cols = read_pod<std::uint32_t>(in);
    Eigen::MatrixXd tensor(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r) {
      for (std::uint32_t c = 0; c < cols; ++c) {
        tensor(r, c) = read_pod<double>(in);
      }
    }
    if (!in) throw DataError("truncated checkpoint: " + path);
    ck.tensors.emplace(std::move(name), std::move(tensor));
  }
  return ck;
}

}  // namespace mdhan::ad
