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

#include "mdhan/topics.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "mdhan/errors.hpp"
#include "mdhan/prng.hpp"

namespace mdhan::topics {

using json = nlohmann::json;

namespace {

void check_config(const LdaConfig& cfg) {
  if (cfg.topics < 2) throw UsageError("topic count must be >= 2");
  if (cfg.beta <= 0.0) throw UsageError("beta must be positive");
  if (cfg.resolved_alpha() <= 0.0) throw UsageError("alpha must be positive");
  if (cfg.iterations < 1) throw UsageError("iterations must be >= 1");
  if (cfg.fold_in_sweeps < 1) throw UsageError("fold-in sweeps must be >= 1");
}

// Samples an index proportionally to `weights` (not normalized).
int sample_discrete(const std::vector<double>& weights, double total,
                    std::mt19937_64& rng) {
  double r = uniform_unit(rng) * total;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    r -= weights[k];
    if (r < 0.0) return static_cast<int>(k);
  }
  return static_cast<int>(weights.size()) - 1;  // fp slack lands on last
}

std::uint64_t doc_fingerprint(const std::vector<std::string>& doc) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& tok : doc) {
    h = splitmix64(h ^ fnv1a64(tok));
  }
  return h;
}

}  // namespace

int LdaModel::index_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? -1 : it->second;
}

double LdaModel::word_prob(int topic, int word) const {
  const auto V = static_cast<double>(vocab_.size());
  return (static_cast<double>(topic_word_counts_[topic][word]) + config_.beta) /
         (static_cast<double>(topic_counts_[topic]) + V * config_.beta);
}

Eigen::MatrixXd LdaModel::phi() const {
  const int K = config_.topics;
  const auto V = static_cast<Eigen::Index>(vocab_.size());
  Eigen::MatrixXd out(K, V);
  for (int k = 0; k < K; ++k) {
    for (Eigen::Index w = 0; w < V; ++w) {
      out(k, w) = word_prob(k, static_cast<int>(w));
    }
  }
  return out;
}

LdaModel fit_lda(const std::vector<std::vector<std::string>>& docs,
                 const LdaConfig& cfg) {
  check_config(cfg);

  LdaModel model;
  model.config_ = cfg;

  // Vocabulary in first-occurrence order; token ids per document.
  std::vector<std::vector<int>> ids(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    ids[d].reserve(docs[d].size());
    for (const auto& tok : docs[d]) {
      auto [it, inserted] =
          model.index_.emplace(tok, static_cast<int>(model.vocab_.size()));
      if (inserted) model.vocab_.push_back(tok);
      ids[d].push_back(it->second);
    }
  }
  if (model.vocab_.empty()) throw DataError("topic fit: no tokens in any document");

  const int K = cfg.topics;
  const auto V = model.vocab_.size();
  const double alpha = cfg.resolved_alpha();
  const double beta = cfg.beta;
  const double vbeta = static_cast<double>(V) * beta;

  auto& nkw = model.topic_word_counts_;
  auto& nk = model.topic_counts_;
  nkw.assign(K, std::vector<std::int64_t>(V, 0));
  nk.assign(K, 0);
  std::vector<std::vector<std::int64_t>> ndk(docs.size(),
                                             std::vector<std::int64_t>(K, 0));
  std::vector<std::vector<int>> z(docs.size());

  auto rng = make_engine(cfg.seed, "lda-gibbs");

  for (std::size_t d = 0; d < ids.size(); ++d) {
    z[d].resize(ids[d].size());
    for (std::size_t i = 0; i < ids[d].size(); ++i) {
      const int k = static_cast<int>(uniform_below(rng, K));
      z[d][i] = k;
      ++ndk[d][k];
      ++nkw[k][ids[d][i]];
      ++nk[k];
    }
  }

  std::vector<double> weights(K);
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    for (std::size_t d = 0; d < ids.size(); ++d) {
      for (std::size_t i = 0; i < ids[d].size(); ++i) {
        const int w = ids[d][i];
        const int old = z[d][i];
        --ndk[d][old];
        --nkw[old][w];
        --nk[old];

        double total = 0.0;
        for (int k = 0; k < K; ++k) {
          weights[k] = (static_cast<double>(ndk[d][k]) + alpha) *
                       (static_cast<double>(nkw[k][w]) + beta) /
                       (static_cast<double>(nk[k]) + vbeta);
          total += weights[k];
        }
        const int knew = sample_discrete(weights, total, rng);
        z[d][i] = knew;
        ++ndk[d][knew];
        ++nkw[knew][w];
        ++nk[knew];
      }
    }
  }
  return model;
}

Eigen::VectorXd infer_doc_topics(const LdaModel& model,
                                 const std::vector<std::string>& doc) {
  const int K = model.config().topics;
  const double alpha = model.config().resolved_alpha();
  Eigen::VectorXd theta(K);

  std::vector<int> ids;
  ids.reserve(doc.size());
  for (const auto& tok : doc) {
    const int w = model.index_of(tok);
    if (w >= 0) ids.push_back(w);
  }
  if (ids.empty()) {
    theta.setConstant(1.0 / K);
    return theta;
  }

  auto rng = make_engine(model.config().seed ^ doc_fingerprint(doc), "lda-infer");
  std::vector<std::int64_t> mk(K, 0);
  std::vector<int> z(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const int k = static_cast<int>(uniform_below(rng, K));
    z[i] = k;
    ++mk[k];
  }

  std::vector<double> weights(K);
  for (int sweep = 0; sweep < model.config().fold_in_sweeps; ++sweep) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      --mk[z[i]];
      double total = 0.0;
      for (int k = 0; k < K; ++k) {
        weights[k] =
            (static_cast<double>(mk[k]) + alpha) * model.word_prob(k, ids[i]);
        total += weights[k];
      }
      z[i] = sample_discrete(weights, total, rng);
      ++mk[z[i]];
    }
  }

  const double denom = static_cast<double>(ids.size()) + K * alpha;
  for (int k = 0; k < K; ++k) {
    theta(k) = (static_cast<double>(mk[k]) + alpha) / denom;
  }
  return theta;
}

std::vector<std::pair<std::string, double>> top_words(const LdaModel& model, int topic,
                                                      int n) {
  if (topic < 0 || topic >= model.config().topics) {
    throw UsageError("topic index out of range: " + std::to_string(topic));
  }
  if (n < 0) throw UsageError("top_words: n must be non-negative");
  std::vector<std::pair<std::string, double>> scored;
  scored.reserve(model.vocab_size());
  for (std::size_t w = 0; w < model.vocab_size(); ++w) {
    scored.emplace_back(model.vocab()[w], model.word_prob(topic, static_cast<int>(w)));
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  scored.resize(std::min<std::size_t>(n, scored.size()));
  return scored;
}

void LdaModel::save(const std::string& path) const {
  json j{{"topics", config_.topics},
         {"alpha", config_.alpha},
         {"beta", config_.beta},
         {"iterations", config_.iterations},
         {"fold_in_sweeps", config_.fold_in_sweeps},
         {"seed", config_.seed},
         {"vocab", vocab_},
         {"topic_word_counts", topic_word_counts_},
         {"topic_counts", topic_counts_}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write topic model: " + path);
  out << j.dump() << '\n';
}

LdaModel LdaModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open topic model: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw DataError("malformed topic model file: " + std::string(e.what()));
  }
  LdaModel model;
  try {
    model.config_.topics = j.at("topics").get<int>();
    model.config_.alpha = j.at("alpha").get<double>();
    model.config_.beta = j.at("beta").get<double>();
    model.config_.iterations = j.at("iterations").get<int>();
    model.config_.fold_in_sweeps = j.at("fold_in_sweeps").get<int>();
    model.config_.seed = j.at("seed").get<std::uint64_t>();
    model.vocab_ = j.at("vocab").get<std::vector<std::string>>();
    model.topic_word_counts_ =
        j.at("topic_word_counts").get<std::vector<std::vector<std::int64_t>>>();
    model.topic_counts_ = j.at("topic_counts").get<std::vector<std::int64_t>>();
  } catch (const json::exception& e) {
    throw DataError("topic model file missing fields: " + std::string(e.what()));
  }
  const auto K = static_cast<std::size_t>(model.config_.topics);
  if (model.topic_word_counts_.size() != K || model.topic_counts_.size() != K) {
    throw DataError("topic model count state does not match topic count");
  }
  for (const auto& row : model.topic_word_counts_) {
    if (row.size() != model.vocab_.size()) {
      throw DataError("topic model count state does not match vocabulary");
    }
  }
  for (std::size_t w = 0; w < model.vocab_.size(); ++w) {
    model.index_.emplace(model.vocab_[w], static_cast<int>(w));
  }
  return model;
}

}  // namespace mdhan::topics
