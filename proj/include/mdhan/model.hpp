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

#ifndef MDHAN_MODEL_HPP
#define MDHAN_MODEL_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mdhan/autodiff.hpp"
#include "mdhan/features.hpp"

namespace mdhan::model {

// Network and trainer settings. The text branch (hierarchical attention over
// words and tweets) and the feature branch (one-hidden-layer MLP over the
// user vector) can be toggled independently; at least one must stay on.
struct ModelConfig {
  int embed_dim = 100;
  int hidden = 100;      // per GRU direction; concatenated states are 2x
  int n_max = 30;        // max tokens per tweet (truncated upstream)
  int l_max = 200;       // max tweets per user (truncated upstream)
  int mlp_hidden = 100;
  double dropout = 0.5;  // on s and p before fusion, training only
  int batch = 16;
  double lr = 0.001;
  int epochs = 10;
  std::uint64_t seed = 0;
  // optional non-overlapping max-pool over word annotation columns before
  // word attention; 0 = off. When on, word attention runs over pooled blocks.
  int max_pool_words = 0;
  bool use_text = true;      // hierarchical tweet encoder -> s
  bool use_features = true;  // modality MLP -> p
  features::ModalityMask mask;
};

// Throws UsageError on nonsensical settings.
void check_config(const ModelConfig& cfg);

// Stable fingerprint of every architecture-relevant field; checkpoints carry
// it so a load under a different configuration fails loudly.
std::uint64_t config_fingerprint(const ModelConfig& cfg);

// Trainable tensors live in `tensors`, keyed by dotted names
// ("word_gru_fwd.Wz", "tweet_attn.u", "fusion.W", ...). The embedding table
// is frozen: rows are word vectors, the final row is the all-zero
// unknown-word vector, and training never touches it.
struct ModelParams {
  ModelConfig config;
  Eigen::MatrixXd embeddings;
  ad::ParamMap tensors;
};

// Glorot-uniform matrices, zero biases, uniform(-0.1, 0.1) attention context
// vectors; each tensor draws from its own name-derived stream, so the result
// does not depend on initialization order.
ModelParams init_params(const ModelConfig& cfg, Eigen::MatrixXd embeddings);

// One user, ready for the network: tweets as embedding-row ids (empty tweets
// allowed; they are skipped by the encoder and get attention weight 0), plus
// the normalized feature vector.
struct TrainUser {
  std::string user_id;
  int label = 0;
  std::vector<std::vector<int>> tweets;
  Eigen::VectorXd feats;
};

// Forward-pass outputs for one user.
struct UserEncoding {
  Eigen::VectorXd s;  // tweet-sequence vector, 2*hidden (empty if text off)
  Eigen::VectorXd p;  // modality vector, mlp_hidden (empty if features off)
  double yhat = 0.0;
  // per original tweet position; empty tweets hold weight 0 / no words
  std::vector<double> tweet_attn;
  std::vector<std::vector<double>> word_attn;
};

// Single GRU step:
//   z = sigmoid(Wz x + Uz h + bz)
//   r = sigmoid(Wr x + Ur h + br)
//   c = tanh(Wh x + Uh (r*h) + bh)
//   h' = (1-z)*h + z*c
struct GruCellNodes {
  ad::NodeId Wz, Uz, bz;
  ad::NodeId Wr, Ur, br;
  ad::NodeId Wh, Uh, bh;
};
ad::NodeId gru_cell(ad::Tape& tape, const GruCellNodes& w, ad::NodeId x,
                    ad::NodeId h_prev);

// The whole per-user computation graph on an existing tape whose `nodes`
// map the parameter tensors. Returns the prediction node plus the attention
// nodes needed for extraction. Dropout fires only with train=true.
struct UserGraph {
  ad::NodeId yhat = -1;
  ad::NodeId s = -1;
  ad::NodeId p = -1;
  ad::NodeId tweet_alpha = -1;            // over non-empty tweets
  std::vector<ad::NodeId> word_alpha;     // per non-empty tweet
  std::vector<std::size_t> nonempty_pos;  // original index of each
};
UserGraph build_user_graph(ad::Tape& tape,
                           const std::map<std::string, ad::NodeId>& nodes,
                           const ModelConfig& cfg,
                           const Eigen::MatrixXd& embeddings,
                           const TrainUser& user, bool train,
                           std::uint64_t dropout_salt);

// Inference: fresh tape, dropout off, attention weights extracted and
// re-aligned to original tweet positions.
UserEncoding encode_user(const ModelParams& params, const TrainUser& user);

inline bool classify(double yhat) { return yhat >= 0.5; }

// yhat for each user, in order.
std::vector<double> predict_scores(const ModelParams& params,
                                   const std::vector<TrainUser>& users);

struct EpochStats {
  double loss = 0.0;      // mean per-user training loss (dropout active)
  double accuracy = 0.0;  // train-set accuracy with dropout off
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochStats> history;
};

// Mini-batch Adam over per-epoch reshuffles of the users. Deterministic for
// a fixed (config, embeddings, users). Non-finite values anywhere in the
// computation abort with a NumericError naming the epoch and batch.
TrainResult train(const std::vector<TrainUser>& users, const ModelConfig& cfg,
                  Eigen::MatrixXd embeddings);

// Checkpoints hold the trainable tensors plus the config fingerprint.
void save_model(const ModelParams& params, const std::string& path);
// Restores tensors into a params built from `cfg` and `embeddings`;
// fingerprint or tensor-shape mismatch is a DataError.
ModelParams load_model(const std::string& path, const ModelConfig& cfg,
                       Eigen::MatrixXd embeddings);

}  // namespace mdhan::model

#endif  // MDHAN_MODEL_HPP
