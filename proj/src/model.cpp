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

#include "mdhan/model.hpp"

#include <algorithm>
#include <sstream>

#include "mdhan/errors.hpp"
#include "mdhan/prng.hpp"

namespace mdhan::model {

namespace {

using ad::NodeId;
using ad::Tape;

// name -> (rows, cols) for every trainable tensor under a config
std::map<std::string, std::pair<Eigen::Index, Eigen::Index>> tensor_shapes(
    const ModelConfig& cfg) {
  std::map<std::string, std::pair<Eigen::Index, Eigen::Index>> shapes;
  const Eigen::Index h = cfg.hidden;
  if (cfg.use_text) {
    auto gru = [&](const std::string& prefix, Eigen::Index in_dim) {
      shapes[prefix + ".Wz"] = {h, in_dim};
      shapes[prefix + ".Uz"] = {h, h};
      shapes[prefix + ".bz"] = {h, 1};
      shapes[prefix + ".Wr"] = {h, in_dim};
      shapes[prefix + ".Ur"] = {h, h};
      shapes[prefix + ".br"] = {h, 1};
      shapes[prefix + ".Wh"] = {h, in_dim};
      shapes[prefix + ".Uh"] = {h, h};
      shapes[prefix + ".bh"] = {h, 1};
    };
    gru("word_gru_fwd", cfg.embed_dim);
    gru("word_gru_bwd", cfg.embed_dim);
    gru("tweet_gru_fwd", 2 * h);
    gru("tweet_gru_bwd", 2 * h);
    shapes["word_attn.W"] = {h, 2 * h};
    shapes["word_attn.b"] = {h, 1};
    shapes["word_attn.u"] = {h, 1};
    shapes["tweet_attn.W"] = {h, 2 * h};
    shapes["tweet_attn.b"] = {h, 1};
    shapes["tweet_attn.u"] = {h, 1};
  }
  if (cfg.use_features) {
    shapes["mlp.W"] = {cfg.mlp_hidden, features::ModalityLayout::kTotal};
    shapes["mlp.b"] = {cfg.mlp_hidden, 1};
  }
  const Eigen::Index fusion_in = (cfg.use_features ? cfg.mlp_hidden : 0) +
                                 (cfg.use_text ? 2 * h : 0);
  shapes["fusion.W"] = {fusion_in, 1};
  shapes["fusion.b"] = {1, 1};
  return shapes;
}

bool is_bias(const std::string& name) {
  const auto dot = name.find('.');
  return dot != std::string::npos && name[dot + 1] == 'b';
}

bool is_context_vector(const std::string& name) {
  return name.size() > 2 && name.compare(name.size() - 2, 2, ".u") == 0;
}

GruCellNodes gru_nodes(const std::map<std::string, NodeId>& nodes,
                       const std::string& prefix) {
  auto get = [&](const char* suffix) {
    auto it = nodes.find(prefix + "." + suffix);
    if (it == nodes.end())
      throw UsageError("missing parameter tensor " + prefix + "." + suffix);
    return it->second;
  };
  GruCellNodes w;
  w.Wz = get("Wz");
  w.Uz = get("Uz");
  w.bz = get("bz");
  w.Wr = get("Wr");
  w.Ur = get("Ur");
  w.br = get("br");
  w.Wh = get("Wh");
  w.Uh = get("Uh");
  w.bh = get("bh");
  return w;
}

NodeId require_node(const std::map<std::string, NodeId>& nodes,
                    const std::string& name) {
  auto it = nodes.find(name);
  if (it == nodes.end()) throw UsageError("missing parameter tensor " + name);
  return it->second;
}

// Bidirectional GRU over a sequence of column-vector nodes; returns the
// concatenated [forward; backward] state per position.
std::vector<NodeId> bigru(Tape& t, const std::map<std::string, NodeId>& nodes,
                          const std::string& prefix,
                          const std::vector<NodeId>& xs, Eigen::Index hidden) {
  const GruCellNodes fwd = gru_nodes(nodes, prefix + "_fwd");
  const GruCellNodes bwd = gru_nodes(nodes, prefix + "_bwd");
  const NodeId h0 = t.input(Eigen::MatrixXd::Zero(hidden, 1), false);

  std::vector<NodeId> fwd_states(xs.size());
  NodeId h = h0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    h = gru_cell(t, fwd, xs[j], h);
    fwd_states[j] = h;
  }
  std::vector<NodeId> bwd_states(xs.size());
  h = h0;
  for (std::size_t j = xs.size(); j-- > 0;) {
    h = gru_cell(t, bwd, xs[j], h);
    bwd_states[j] = h;
  }

  std::vector<NodeId> states(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j)
    states[j] = t.vcat({fwd_states[j], bwd_states[j]});
  return states;
}

// Attention over the columns of an annotation matrix H (dim x n):
//   U = tanh(W H + b 1ᵀ); scores = Uᵀ u; alpha = softmax(scores);
//   summary = H alpha.
struct AttentionOut {
  NodeId alpha;    // n x 1
  NodeId summary;  // dim x 1
};
AttentionOut attention(Tape& t, NodeId H, NodeId W, NodeId b, NodeId u) {
  const Eigen::Index n = t.value(H).cols();
  const NodeId ones_row = t.input(Eigen::MatrixXd::Ones(1, n), false);
  const NodeId scores_mat = t.tanh(t.add(t.matmul(W, H), t.matmul(b, ones_row)));
  const NodeId scores = t.transpose(t.matmul(t.transpose(u), scores_mat));
  AttentionOut out;
  out.alpha = t.softmax(scores);
  out.summary = t.matmul(H, out.alpha);
  return out;
}

}  // namespace

void check_config(const ModelConfig& cfg) {
  if (cfg.embed_dim <= 0 || cfg.hidden <= 0 || cfg.n_max <= 0 ||
      cfg.l_max < 1 || cfg.mlp_hidden <= 0 || cfg.batch <= 0 ||
      cfg.epochs < 0)
    throw UsageError("model dimensions and batch/epoch counts must be positive");
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0)
    throw UsageError("dropout must lie in [0, 1)");
  if (cfg.lr <= 0.0) throw UsageError("learning rate must be positive");
  if (cfg.max_pool_words < 0)
    throw UsageError("max_pool_words must be >= 0 (0 disables pooling)");
  if (!cfg.use_text && !cfg.use_features)
    throw UsageError("at least one of the text / feature branches must be on");
}

std::uint64_t config_fingerprint(const ModelConfig& cfg) {
  std::ostringstream os;
  os << cfg.embed_dim << '|' << cfg.hidden << '|' << cfg.n_max << '|'
     << cfg.l_max << '|' << cfg.mlp_hidden << '|' << cfg.max_pool_words << '|'
     << cfg.use_text << '|' << cfg.use_features << '|' << cfg.mask.social
     << cfg.mask.emotion << cfg.mask.topic << cfg.mask.domain;
  return fnv1a64(os.str());
}

ModelParams init_params(const ModelConfig& cfg, Eigen::MatrixXd embeddings) {
  check_config(cfg);
  if (cfg.use_text && embeddings.cols() != cfg.embed_dim)
    throw UsageError("embedding table has " + std::to_string(embeddings.cols()) +
                     " columns, config expects " + std::to_string(cfg.embed_dim));
  ModelParams params;
  params.config = cfg;
  params.embeddings = std::move(embeddings);
  for (const auto& [name, shape] : tensor_shapes(cfg)) {
    auto rng = make_engine(cfg.seed ^ fnv1a64(name), "param-init");
    if (is_bias(name)) {
      params.tensors[name] = Eigen::MatrixXd::Zero(shape.first, shape.second);
    } else if (is_context_vector(name)) {
      params.tensors[name] =
          ad::init_uniform(shape.first, shape.second, -0.1, 0.1, rng);
    } else {
      params.tensors[name] = ad::init_glorot(shape.first, shape.second, rng);
    }
  }
  return params;
}

NodeId gru_cell(Tape& t, const GruCellNodes& w, NodeId x, NodeId h_prev) {
  const NodeId z = t.sigmoid(
      t.add(t.add(t.matmul(w.Wz, x), t.matmul(w.Uz, h_prev)), w.bz));
  const NodeId r = t.sigmoid(
      t.add(t.add(t.matmul(w.Wr, x), t.matmul(w.Ur, h_prev)), w.br));
  const NodeId cand = t.tanh(
      t.add(t.add(t.matmul(w.Wh, x), t.matmul(w.Uh, t.mul(r, h_prev))), w.bh));
  return t.add(t.mul(t.one_minus(z), h_prev), t.mul(z, cand));
}

UserGraph build_user_graph(Tape& t, const std::map<std::string, NodeId>& nodes,
                           const ModelConfig& cfg,
                           const Eigen::MatrixXd& embeddings,
                           const TrainUser& user, bool train,
                           std::uint64_t dropout_salt) {
  UserGraph g;
  std::vector<NodeId> fusion_parts;

  if (cfg.use_features) {
    if (user.feats.size() != features::ModalityLayout::kTotal)
      throw UsageError("user " + user.user_id + " carries " +
                       std::to_string(user.feats.size()) +
                       " features, expected " +
                       std::to_string(features::ModalityLayout::kTotal));
    Eigen::VectorXd masked = user.feats;
    features::apply_mask(masked, cfg.mask);
    const NodeId f = t.input(masked, false);
    g.p = t.relu(t.add(t.matmul(require_node(nodes, "mlp.W"), f),
                       require_node(nodes, "mlp.b")));
    NodeId p_fused = train ? t.dropout(g.p, cfg.dropout, true, cfg.seed,
                                       dropout_salt * 2)
                           : g.p;
    fusion_parts.push_back(p_fused);
  }

  if (cfg.use_text) {
    if (user.tweets.size() > static_cast<std::size_t>(cfg.l_max))
      throw UsageError("user " + user.user_id + " has " +
                       std::to_string(user.tweets.size()) +
                       " tweets, above the configured maximum " +
                       std::to_string(cfg.l_max));
    std::vector<NodeId> tweet_vectors;
    for (std::size_t i = 0; i < user.tweets.size(); ++i) {
      const auto& ids = user.tweets[i];
      if (ids.empty()) continue;  // padding never reaches the encoder
      if (ids.size() > static_cast<std::size_t>(cfg.n_max))
        throw UsageError("tweet " + std::to_string(i) + " of user " +
                         user.user_id + " has " + std::to_string(ids.size()) +
                         " tokens, above the configured maximum " +
                         std::to_string(cfg.n_max));
      const NodeId E = t.embedding_lookup(embeddings, ids);
      std::vector<NodeId> xs(ids.size());
      for (std::size_t j = 0; j < ids.size(); ++j)
        xs[j] = t.take_row(E, static_cast<Eigen::Index>(j));

      auto states = bigru(t, nodes, "word_gru", xs, cfg.hidden);
      NodeId H = t.hcat(states);
      if (cfg.max_pool_words > 0) H = t.maxpool_cols(H, cfg.max_pool_words);
      const auto attn =
          attention(t, H, require_node(nodes, "word_attn.W"),
                    require_node(nodes, "word_attn.b"),
                    require_node(nodes, "word_attn.u"));
      g.word_alpha.push_back(attn.alpha);
      g.nonempty_pos.push_back(i);
      tweet_vectors.push_back(attn.summary);
    }
    if (tweet_vectors.empty())
      throw DataError("user " + user.user_id +
                      " has no non-empty tweets to encode");

    auto states = bigru(t, nodes, "tweet_gru", tweet_vectors, cfg.hidden);
    const NodeId Ht = t.hcat(states);
    const auto attn = attention(t, Ht, require_node(nodes, "tweet_attn.W"),
                                require_node(nodes, "tweet_attn.b"),
                                require_node(nodes, "tweet_attn.u"));
    g.tweet_alpha = attn.alpha;
    g.s = attn.summary;
    NodeId s_fused = train ? t.dropout(g.s, cfg.dropout, true, cfg.seed,
                                       dropout_salt * 2 + 1)
                           : g.s;
    fusion_parts.push_back(s_fused);
  }

  const NodeId cat =
      fusion_parts.size() == 1 ? fusion_parts[0] : t.vcat(fusion_parts);
  g.yhat = t.sigmoid(t.add(t.dot(require_node(nodes, "fusion.W"), cat),
                           require_node(nodes, "fusion.b")));
  return g;
}

namespace {

std::map<std::string, NodeId> put_params(Tape& t, const ad::ParamMap& tensors,
                                         bool requires_grad) {
  std::map<std::string, NodeId> nodes;
  for (const auto& [name, tensor] : tensors)
    nodes[name] = t.input(tensor, requires_grad);
  return nodes;
}

}  // namespace

UserEncoding encode_user(const ModelParams& params, const TrainUser& user) {
  Tape t;
  auto nodes = put_params(t, params.tensors, false);
  const UserGraph g = build_user_graph(t, nodes, params.config,
                                       params.embeddings, user, false, 0);
  UserEncoding enc;
  enc.yhat = t.value(g.yhat)(0, 0);
  if (g.s >= 0) enc.s = t.value(g.s).col(0);
  if (g.p >= 0) enc.p = t.value(g.p).col(0);

  if (params.config.use_text) {
    enc.tweet_attn.assign(user.tweets.size(), 0.0);
    enc.word_attn.assign(user.tweets.size(), {});
    const Eigen::MatrixXd alpha = t.value(g.tweet_alpha);
    for (std::size_t k = 0; k < g.nonempty_pos.size(); ++k) {
      const std::size_t pos = g.nonempty_pos[k];
      enc.tweet_attn[pos] = alpha(static_cast<Eigen::Index>(k), 0);
      const Eigen::MatrixXd wa = t.value(g.word_alpha[k]);
      enc.word_attn[pos].assign(wa.data(), wa.data() + wa.rows());
    }
  }
  return enc;
}

std::vector<double> predict_scores(const ModelParams& params,
                                   const std::vector<TrainUser>& users) {
  std::vector<double> scores;
  scores.reserve(users.size());
  for (const auto& u : users) scores.push_back(encode_user(params, u).yhat);
  return scores;
}

TrainResult train(const std::vector<TrainUser>& users, const ModelConfig& cfg,
                  Eigen::MatrixXd embeddings) {
  check_config(cfg);
  if (users.empty()) throw UsageError("cannot train on zero users");

  TrainResult result;
  result.params = init_params(cfg, std::move(embeddings));
  ad::AdamConfig adam_cfg;
  adam_cfg.lr = cfg.lr;
  ad::AdamState adam(adam_cfg);

  std::vector<std::size_t> order(users.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto rng = make_engine(cfg.seed, "shuffle", static_cast<std::uint64_t>(epoch));
    shuffle_vec(order, rng);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
      try {
        Tape t;
        auto nodes = put_params(t, result.params.tensors, true);
        std::vector<NodeId> losses;
        for (std::size_t k = start; k < stop; ++k) {
          const TrainUser& u = users[order[k]];
          const std::uint64_t salt =
              (static_cast<std::uint64_t>(epoch) << 32) | order[k];
          const UserGraph g = build_user_graph(
              t, nodes, cfg, result.params.embeddings, u, true, salt);
          losses.push_back(t.bce_loss(g.yhat, static_cast<double>(u.label)));
        }
        const NodeId batch_loss =
            t.mean(losses.size() == 1 ? losses[0] : t.vcat(losses));
        t.backward(batch_loss);
        loss_sum += t.value(batch_loss)(0, 0) * static_cast<double>(stop - start);

        ad::ParamMap grads;
        for (const auto& [name, id] : nodes) grads[name] = t.grad(id);
        adam.step(result.params.tensors, grads);
      } catch (const NumericError& e) {
        throw NumericError("training diverged at epoch " +
                           std::to_string(epoch) + ", batch starting at " +
                           std::to_string(start) + ": " + e.what());
      }
    }

    EpochStats stats;
    stats.loss = loss_sum / static_cast<double>(users.size());
    int correct = 0;
    for (const auto& u : users) {
      const double yhat = encode_user(result.params, u).yhat;
      correct += (classify(yhat) ? 1 : 0) == u.label ? 1 : 0;
    }
    stats.accuracy = static_cast<double>(correct) / static_cast<double>(users.size());
    result.history.push_back(stats);
  }
  return result;
}

void save_model(const ModelParams& params, const std::string& path) {
  ad::save_checkpoint(path, params.tensors, config_fingerprint(params.config));
}

ModelParams load_model(const std::string& path, const ModelConfig& cfg,
                       Eigen::MatrixXd embeddings) {
  const ad::Checkpoint ck = ad::load_checkpoint(path);
  if (ck.config_hash != config_fingerprint(cfg))
    throw DataError("checkpoint " + path +
                    " was written under a different model configuration");
  ModelParams params = init_params(cfg, std::move(embeddings));
  if (ck.tensors.size() != params.tensors.size())
    throw DataError("checkpoint " + path + " holds " +
                    std::to_string(ck.tensors.size()) + " tensors, expected " +
                    std::to_string(params.tensors.size()));
  for (auto& [name, tensor] : params.tensors) {
    auto it = ck.tensors.find(name);
    if (it == ck.tensors.end())
      throw DataError("checkpoint " + path + " is missing tensor " + name);
    if (it->second.rows() != tensor.rows() || it->second.cols() != tensor.cols())
      throw DataError("checkpoint tensor " + name + " has the wrong shape");
    tensor = it->second;
  }
  return params;
}

}  // namespace mdhan::model
