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

// Topic modeling by collapsed Gibbs sampling. Fitting runs a single
// deterministic chain; inference folds a new document in against the frozen
// count state and may run in parallel for distinct documents.

#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mdhan::topics {

struct LdaConfig {
  int topics = 25;
  double alpha = -1.0;  // negative → 50/topics
  double beta = 0.01;
  int iterations = 500;
  int fold_in_sweeps = 50;
  std::uint64_t seed = 0;

  double resolved_alpha() const { return alpha < 0 ? 50.0 / topics : alpha; }
};

class LdaModel {
 public:
  LdaModel() = default;

  const LdaConfig& config() const { return config_; }
  std::size_t vocab_size() const { return vocab_.size(); }
  const std::vector<std::string>& vocab() const { return vocab_; }
  // -1 when the token was not in the training vocabulary.
  int index_of(const std::string& token) const;

  // K x V; every row is a probability distribution.
  Eigen::MatrixXd phi() const;

  // Smoothed word probability under one topic.
  double word_prob(int topic, int word) const;

  void save(const std::string& path) const;
  static LdaModel load(const std::string& path);

  // Count state is integer, which is what makes persistence and
  // reproducibility exact.
  const std::vector<std::vector<std::int64_t>>& topic_word_counts() const {
    return topic_word_counts_;
  }
  const std::vector<std::int64_t>& topic_counts() const { return topic_counts_; }

 private:
  friend LdaModel fit_lda(const std::vector<std::vector<std::string>>&,
                          const LdaConfig&);
  LdaConfig config_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::vector<std::int64_t>> topic_word_counts_;  // K x V
  std::vector<std::int64_t> topic_counts_;                    // K
};

// Builds the vocabulary from the documents (first-occurrence order), runs
// cfg.iterations full Gibbs sweeps, and freezes the final count state.
LdaModel fit_lda(const std::vector<std::vector<std::string>>& docs,
                 const LdaConfig& cfg);

// Fold-in inference: model counts stay frozen, unseen tokens are skipped.
// Returns the smoothed topic distribution; an empty or all-unseen document
// yields the uniform vector. The chain is seeded from the document content,
// so results do not depend on inference order.
Eigen::VectorXd infer_doc_topics(const LdaModel& model,
                                 const std::vector<std::string>& doc);

// n highest-probability tokens of one topic, ties lexicographic, n clamped
// to the vocabulary size.
std::vector<std::pair<std::string, double>> top_words(const LdaModel& model, int topic,
                                                      int n);

}  // namespace mdhan::topics
