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

// Lexical resources: word embeddings, emoji polarity, VAD affect norms,
// symptom keyword categories, and antidepressant names. All types are
// immutable after construction and safe for concurrent reads.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace mdhan::lex {

// Frozen word-vector table. Unknown tokens map to a designated all-zeros UNK
// row, so lookups are total. Row `size()` of matrix() is the UNK row.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return tokens_.size(); }
  bool contains(const std::string& token) const { return index_.count(token) != 0; }

  // Row index for a token; unknown tokens get the UNK row (== size()).
  int index_of(const std::string& token) const;
  int unk_index() const { return static_cast<int>(tokens_.size()); }

  // (size()+1) x dimension; last row is the zero UNK vector.
  const Eigen::MatrixXd& matrix() const { return vectors_; }
  Eigen::VectorXd lookup(const std::string& token) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  // Parses "token v1 .. vd" lines; dimension inferred from the first line,
  // duplicate tokens keep their first occurrence, arity mismatches are
  // reported with the offending line number.
  static EmbeddingTable load(const std::string& path);

  // Deterministic synthetic table: each token's vector depends only on
  // (seed, token), never on the order or content of the rest of the vocab.
  // Components are uniform in [-0.1, 0.1].
  static EmbeddingTable random(const std::vector<std::string>& tokens,
                               std::size_t dimension, std::uint64_t seed);

 private:
  std::size_t dimension_ = 0;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  Eigen::MatrixXd vectors_;  // rows aligned with tokens_, plus UNK row
};

enum class Polarity { kPositive, kNeutral, kNegative };

// Emoji -> polarity map. Keys are single-codepoint UTF-8 sequences; counting
// scans raw text for non-overlapping occurrences of each key (UTF-8 encodings
// of distinct codepoints are never prefixes of each other, so counts are
// unambiguous).
class EmojiLexicon {
 public:
  struct Counts {
    int positive = 0;
    int neutral = 0;
    int negative = 0;
  };

  static EmojiLexicon load(const std::string& path);

  std::size_t size() const { return polarity_.size(); }
  Counts count(std::string_view text) const;

 private:
  std::unordered_map<std::string, Polarity> polarity_;
};

struct VadScore {
  double valence = 0.0;
  double arousal = 0.0;
  double dominance = 0.0;
};

// Word -> (valence, arousal, dominance) affect norms.
class VadLexicon {
 public:
  static VadLexicon load(const std::string& path);

  std::size_t size() const { return scores_.size(); }
  // nullptr when the word has no norm entry.
  const VadScore* find(const std::string& word) const;

 private:
  std::unordered_map<std::string, VadScore> scores_;
};

// Named symptom categories, each a set of keywords. A keyword is a token
// sequence (single words and multi-word phrases); matching slides over a
// token stream and counts every occurrence.
class SymptomLexicon {
 public:
  struct Category {
    std::string name;
    std::vector<std::vector<std::string>> keywords;
  };

  // File format: "[category]" section headers, one keyword per line,
  // '#' comments. Keywords are normalized with the tweet tokenizer.
  static SymptomLexicon load(const std::string& path);

  std::size_t category_count() const { return categories_.size(); }
  const std::vector<Category>& categories() const { return categories_; }

  // Occurrences per category over one token sequence.
  std::vector<int> match_counts(const std::vector<std::string>& tokens) const;

  bool has_keyword(std::size_t category, const std::vector<std::string>& kw) const;
  // No-op when the keyword is already present.
  void add_keyword(std::size_t category, std::vector<std::string> kw);

 private:
  std::vector<Category> categories_;
};

// Flat keyword set with the same phrase matching as SymptomLexicon.
class AntidepressantLexicon {
 public:
  static AntidepressantLexicon load(const std::string& path);

  std::size_t size() const { return names_.size(); }
  int match_count(const std::vector<std::string>& tokens) const;
  const std::vector<std::vector<std::string>>& names() const { return names_; }

 private:
  std::vector<std::vector<std::string>> names_;
};

// Counts occurrences of `phrase` as a consecutive subsequence of `tokens`
// (non-overlapping, left to right).
int count_phrase(const std::vector<std::string>& tokens,
                 const std::vector<std::string>& phrase);

// Adds, per category, the k nearest embedding-vocabulary tokens (cosine
// similarity >= tau) of each single-token seed present in the table. Ties
// break lexicographically; seeds are never removed; multi-token phrases and
// out-of-vocabulary seeds are skipped. Monotone in k.
SymptomLexicon expand_symptom_lexicon(const SymptomLexicon& seeds,
                                      const EmbeddingTable& emb, std::size_t k = 5,
                                      double tau = 0.5);

inline constexpr std::array<std::string_view, 5> kFirstPersonSingular = {
    "i", "me", "my", "mine", "myself"};
inline constexpr std::array<std::string_view, 5> kFirstPersonPlural = {
    "we", "us", "our", "ours", "ourselves"};

}  // namespace mdhan::lex
