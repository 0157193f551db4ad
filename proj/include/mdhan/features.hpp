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

#ifndef MDHAN_FEATURES_HPP
#define MDHAN_FEATURES_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mdhan/corpus.hpp"
#include "mdhan/lexicons.hpp"
#include "mdhan/topics.hpp"

namespace mdhan::features {

// Fixed per-user feature layout: four contiguous modality slices.
//
//   social  [ 0, 33)  profile counters + 24-hour posting histogram
//   emotion [33, 41)  emoji polarity counts, affect sums, pronoun counts
//   topic   [41, 66)  25-topic distribution of the user's combined text
//   domain  [66, 76)  9 symptom-category mention counts + antidepressant count
struct ModalityLayout {
  static constexpr int kSocialOffset = 0;
  static constexpr int kSocialLen = 33;
  static constexpr int kEmotionOffset = 33;
  static constexpr int kEmotionLen = 8;
  static constexpr int kTopicOffset = 41;
  static constexpr int kTopicLen = 25;
  static constexpr int kDomainOffset = 66;
  static constexpr int kDomainLen = 10;
  static constexpr int kTotal = 76;

  // column header names, one per dimension, in layout order
  static std::vector<std::string> names();
};

static_assert(ModalityLayout::kSocialLen + ModalityLayout::kEmotionLen +
                  ModalityLayout::kTopicLen + ModalityLayout::kDomainLen ==
              ModalityLayout::kTotal);

// Which modality slices stay live. A masked slice is zeroed after
// normalization so the downstream network sees no signal from it.
struct ModalityMask {
  bool social = true;
  bool emotion = true;
  bool topic = true;
  bool domain = true;

  bool all_on() const { return social && emotion && topic && domain; }
};

struct FeatureVector {
  Eigen::VectorXd values;  // length ModalityLayout::kTotal
};

// Per-dimension z-score statistics fitted on the training split only.
struct NormStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd std_dev;  // floored at 1e-8, never zero
};

// [followers, friends, favourites, listed, statuses, tweet_count,
//  total_char_length, retweet_count, mention_count] followed by a
// 24-bin histogram of posting hours (UTC).
Eigen::VectorXd social_features(const corpus::UserRecord& user);

// [positive, neutral, negative emoji counts; valence, arousal, dominance
//  sums over affect-lexicon hits; first-person singular and plural pronoun
//  counts]. Counting runs on raw tokens: the stopword list would otherwise
// delete every pronoun this slice exists to count.
Eigen::VectorXd emotion_features(const corpus::UserRecord& user,
                                 const lex::EmojiLexicon& emoji,
                                 const lex::VadLexicon& vad);

// Topic distribution of all of the user's preprocessed tokens folded into
// one document. The model's topic count must equal the slice length.
Eigen::VectorXd topic_features(const corpus::UserRecord& user,
                               const topics::LdaModel& model,
                               const corpus::StopwordSet& stopwords);

// 9 symptom-category mention counts followed by the antidepressant mention
// count; matching runs on raw tokens so multi-word phrases keep their
// function words ("loss of energy").
Eigen::VectorXd domain_features(const corpus::UserRecord& user,
                                const lex::SymptomLexicon& symptoms,
                                const lex::AntidepressantLexicon& antidep);

// Concatenates the four slices in layout order.
FeatureVector assemble(const corpus::UserRecord& user,
                       const lex::EmojiLexicon& emoji, const lex::VadLexicon& vad,
                       const topics::LdaModel& model,
                       const corpus::StopwordSet& stopwords,
                       const lex::SymptomLexicon& symptoms,
                       const lex::AntidepressantLexicon& antidep);

NormStats fit_norm(const std::vector<FeatureVector>& train);
FeatureVector apply_norm(const FeatureVector& v, const NormStats& stats);

// Zeroes the slices whose mask flag is off; other entries are untouched.
void apply_mask(Eigen::VectorXd& values, const ModalityMask& mask);

// One row per user: user_id, then the feature columns named by the layout.
void write_features_csv(const std::string& path,
                        const std::vector<std::string>& user_ids,
                        const std::vector<FeatureVector>& rows);

}  // namespace mdhan::features

#endif  // MDHAN_FEATURES_HPP
