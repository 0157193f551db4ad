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

// Planted-theme corpora and the word-mass purity score used to judge topic
// models in tests.

#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mdhan/prng.hpp"

namespace topic_fixtures {

// Each document draws all its tokens from a single theme's vocabulary.
// Themes rotate round-robin over documents.
inline std::vector<std::vector<std::string>> make_theme_docs(
    const std::vector<std::vector<std::string>>& themes, int docs_per_theme,
    int tokens_per_doc, std::uint64_t seed) {
  std::vector<std::vector<std::string>> docs;
  for (int r = 0; r < docs_per_theme; ++r) {
    for (std::size_t t = 0; t < themes.size(); ++t) {
      auto rng = mdhan::make_engine(seed, "theme-doc", r * themes.size() + t);
      std::vector<std::string> doc;
      for (int i = 0; i < tokens_per_doc; ++i) {
        doc.push_back(themes[t][mdhan::uniform_below(rng, themes[t].size())]);
      }
      docs.push_back(std::move(doc));
    }
  }
  return docs;
}

// For each topic, the share of its word mass that falls on one theme's
// vocabulary; purity is the best one-to-one topic/theme assignment's average
// matched share. 1.0 means every topic sits entirely on its own theme.
inline double word_mass_purity(const std::vector<std::vector<double>>& phi,
                               const std::vector<std::vector<int>>& theme_word_ids) {
  const std::size_t K = phi.size();
  const std::size_t T = theme_word_ids.size();
  std::vector<std::vector<double>> mass(K, std::vector<double>(T, 0.0));
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t t = 0; t < T; ++t) {
      for (int w : theme_word_ids[t]) mass[k][t] += phi[k][w];
    }
  }
  std::vector<std::size_t> perm(T);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 0.0;
  do {
    double total = 0.0;
    for (std::size_t k = 0; k < K && k < T; ++k) total += mass[k][perm[k]];
    best = std::max(best, total / static_cast<double>(std::min(K, T)));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline std::vector<std::vector<double>> to_rows(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> rows(m.rows(), std::vector<double>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) rows[i][j] = m(i, j);
  }
  return rows;
}

}  // namespace topic_fixtures
