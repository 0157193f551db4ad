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

#include "mdhan/lexicons.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "mdhan/corpus.hpp"
#include "mdhan/errors.hpp"
#include "mdhan/prng.hpp"

namespace mdhan::lex {

namespace {

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lexicon file: " + path);
  return in;
}

void strip_cr(std::string& line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
}

}  // namespace

// ---------------------------------------------------------------------------
// embeddings

int EmbeddingTable::index_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? unk_index() : it->second;
}

Eigen::VectorXd EmbeddingTable::lookup(const std::string& token) const {
  return vectors_.row(index_of(token));
}

EmbeddingTable EmbeddingTable::load(const std::string& path) {
  auto in = open_or_throw(path);
  EmbeddingTable table;
  std::vector<Eigen::VectorXd> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string token;
    ss >> token;
    std::vector<double> vals;
    double v;
    while (ss >> v) vals.push_back(v);
    if (!ss.eof()) {
      throw DataError("embedding line " + std::to_string(lineno) +
                      ": non-numeric component");
    }
    if (table.dimension_ == 0) {
      if (vals.empty()) {
        throw DataError("embedding line " + std::to_string(lineno) + ": no components");
      }
      table.dimension_ = vals.size();
    } else if (vals.size() != table.dimension_) {
      throw DataError("embedding line " + std::to_string(lineno) + ": expected " +
                      std::to_string(table.dimension_) + " components, got " +
                      std::to_string(vals.size()));
    }
    if (table.index_.count(token)) continue;  // first occurrence wins
    table.index_.emplace(token, static_cast<int>(rows.size()));
    table.tokens_.push_back(token);
    rows.push_back(Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size()));
  }
  if (rows.empty()) throw DataError("embedding file is empty: " + path);
  table.vectors_.setZero(rows.size() + 1, table.dimension_);
  for (std::size_t i = 0; i < rows.size(); ++i) table.vectors_.row(i) = rows[i];
  return table;
}

EmbeddingTable EmbeddingTable::random(const std::vector<std::string>& tokens,
                                      std::size_t dimension, std::uint64_t seed) {
  if (dimension == 0) throw UsageError("embedding dimension must be positive");
  EmbeddingTable table;
  table.dimension_ = dimension;
  for (const auto& t : tokens) {
    if (table.index_.count(t)) continue;
    table.index_.emplace(t, static_cast<int>(table.tokens_.size()));
    table.tokens_.push_back(t);
  }
  table.vectors_.setZero(table.tokens_.size() + 1, dimension);
  std::uniform_real_distribution<double> unit(-0.1, 0.1);
  for (std::size_t i = 0; i < table.tokens_.size(); ++i) {
    auto rng = make_engine(seed, table.tokens_[i]);
    for (std::size_t d = 0; d < dimension; ++d) {
      table.vectors_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) =
          unit(rng);
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// emoji

EmojiLexicon EmojiLexicon::load(const std::string& path) {
  auto in = open_or_throw(path);
  EmojiLexicon lex;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw DataError("emoji lexicon line " + std::to_string(lineno) +
                      ": expected '<emoji>\\t<polarity>'");
    }
    std::string emoji = line.substr(0, tab);
    std::string pol = line.substr(tab + 1);
    Polarity p;
    if (pol == "positive") {
      p = Polarity::kPositive;
    } else if (pol == "neutral") {
      p = Polarity::kNeutral;
    } else if (pol == "negative") {
      p = Polarity::kNegative;
    } else {
      throw DataError("emoji lexicon line " + std::to_string(lineno) +
                      ": unknown polarity '" + pol + "'");
    }
    lex.polarity_[emoji] = p;
  }
  if (lex.polarity_.empty()) throw DataError("emoji lexicon is empty: " + path);
  return lex;
}

EmojiLexicon::Counts EmojiLexicon::count(std::string_view text) const {
  Counts c;
  for (const auto& [emoji, pol] : polarity_) {
    std::size_t pos = 0;
    while ((pos = text.find(emoji, pos)) != std::string_view::npos) {
      switch (pol) {
        case Polarity::kPositive: ++c.positive; break;
        case Polarity::kNeutral: ++c.neutral; break;
        case Polarity::kNegative: ++c.negative; break;
      }
      pos += emoji.size();
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// VAD norms

VadLexicon VadLexicon::load(const std::string& path) {
  auto in = open_or_throw(path);
  VadLexicon lex;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string word, f1, f2, f3;
    if (!std::getline(ss, word, ',') || !std::getline(ss, f1, ',') ||
        !std::getline(ss, f2, ',') || !std::getline(ss, f3)) {
      throw DataError("vad norms line " + std::to_string(lineno) +
                      ": expected 'word,valence,arousal,dominance'");
    }
    VadScore s;
    try {
      s.valence = std::stod(f1);
      s.arousal = std::stod(f2);
      s.dominance = std::stod(f3);
    } catch (const std::exception&) {
      throw DataError("vad norms line " + std::to_string(lineno) + ": bad number");
    }
    if (!std::isfinite(s.valence) || !std::isfinite(s.arousal) ||
        !std::isfinite(s.dominance)) {
      throw DataError("vad norms line " + std::to_string(lineno) + ": non-finite score");
    }
    lex.scores_[word] = s;
  }
  if (lex.scores_.empty()) throw DataError("vad norms file is empty: " + path);
  return lex;
}

const VadScore* VadLexicon::find(const std::string& word) const {
  auto it = scores_.find(word);
  return it == scores_.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// phrase matching

int count_phrase(const std::vector<std::string>& tokens,
                 const std::vector<std::string>& phrase) {
  if (phrase.empty() || tokens.size() < phrase.size()) return 0;
  int count = 0;
  std::size_t i = 0;
  while (i + phrase.size() <= tokens.size()) {
    bool hit = true;
    for (std::size_t j = 0; j < phrase.size(); ++j) {
      if (tokens[i + j] != phrase[j]) {
        hit = false;
        break;
      }
    }
    if (hit) {
      ++count;
      i += phrase.size();
    } else {
      ++i;
    }
  }
  return count;
}

// ---------------------------------------------------------------------------
// symptom categories

SymptomLexicon SymptomLexicon::load(const std::string& path) {
  auto in = open_or_throw(path);
  SymptomLexicon lex;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw DataError("symptom file line " + std::to_string(lineno) +
                        ": malformed section header");
      }
      lex.categories_.push_back({line.substr(1, line.size() - 2), {}});
      continue;
    }
    if (lex.categories_.empty()) {
      throw DataError("symptom file line " + std::to_string(lineno) +
                      ": keyword before any [category] header");
    }
    auto kw = corpus::raw_tokens(line);
    if (kw.empty()) {
      throw DataError("symptom file line " + std::to_string(lineno) +
                      ": keyword empty after normalization");
    }
    lex.categories_.back().keywords.push_back(std::move(kw));
  }
  if (lex.categories_.empty()) throw DataError("symptom file has no categories: " + path);
  return lex;
}

std::vector<int> SymptomLexicon::match_counts(
    const std::vector<std::string>& tokens) const {
  std::vector<int> counts(categories_.size(), 0);
  for (std::size_t c = 0; c < categories_.size(); ++c) {
    for (const auto& kw : categories_[c].keywords) {
      counts[c] += count_phrase(tokens, kw);
    }
  }
  return counts;
}

bool SymptomLexicon::has_keyword(std::size_t category,
                                 const std::vector<std::string>& kw) const {
  const auto& list = categories_.at(category).keywords;
  return std::find(list.begin(), list.end(), kw) != list.end();
}

void SymptomLexicon::add_keyword(std::size_t category, std::vector<std::string> kw) {
  if (kw.empty()) throw UsageError("cannot add empty symptom keyword");
  if (!has_keyword(category, kw)) {
    categories_.at(category).keywords.push_back(std::move(kw));
  }
}

// ---------------------------------------------------------------------------
// antidepressants

AntidepressantLexicon AntidepressantLexicon::load(const std::string& path) {
  auto in = open_or_throw(path);
  AntidepressantLexicon lex;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    auto name = corpus::raw_tokens(line);
    if (name.empty()) {
      throw DataError("antidepressant list line " + std::to_string(lineno) +
                      ": name empty after normalization");
    }
    if (std::find(lex.names_.begin(), lex.names_.end(), name) == lex.names_.end()) {
      lex.names_.push_back(std::move(name));
    }
  }
  if (lex.names_.empty()) throw DataError("antidepressant list is empty: " + path);
  return lex;
}

int AntidepressantLexicon::match_count(const std::vector<std::string>& tokens) const {
  int count = 0;
  for (const auto& name : names_) count += count_phrase(tokens, name);
  return count;
}

// ---------------------------------------------------------------------------
// seed expansion

SymptomLexicon expand_symptom_lexicon(const SymptomLexicon& seeds,
                                      const EmbeddingTable& emb, std::size_t k,
                                      double tau) {
  if (tau < -1.0 || tau > 1.0) throw UsageError("expansion threshold must be in [-1,1]");
  SymptomLexicon out = seeds;
  if (k == 0) return out;

  const auto& vocab = emb.tokens();
  const auto& mat = emb.matrix();
  Eigen::VectorXd norms(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    norms(static_cast<Eigen::Index>(i)) = mat.row(static_cast<Eigen::Index>(i)).norm();
  }

  for (std::size_t c = 0; c < out.category_count(); ++c) {
    // Expand from the original seeds only, not from already-added neighbors.
    const auto seed_keywords = seeds.categories()[c].keywords;
    for (const auto& kw : seed_keywords) {
      if (kw.size() != 1 || !emb.contains(kw[0])) continue;
      const int si = emb.index_of(kw[0]);
      const double sn = mat.row(si).norm();
      if (sn < 1e-12) continue;

      std::vector<std::pair<double, std::string>> scored;
      for (std::size_t i = 0; i < vocab.size(); ++i) {
        if (static_cast<int>(i) == si) continue;
        const double n = norms(static_cast<Eigen::Index>(i));
        if (n < 1e-12) continue;
        const double cos =
            mat.row(static_cast<Eigen::Index>(i)).dot(mat.row(si)) / (n * sn);
        if (cos >= tau) scored.emplace_back(cos, vocab[i]);
      }
      std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
      });
      const std::size_t take = std::min(k, scored.size());
      for (std::size_t i = 0; i < take; ++i) {
        out.add_keyword(c, {scored[i].second});
      }
    }
  }
  return out;
}

}  // namespace mdhan::lex
