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

#include "mdhan/features.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "mdhan/errors.hpp"

namespace mdhan::features {

namespace {

constexpr double kStdFloor = 1e-8;

// @-prefixed words in the raw text; the tokenizer deletes mentions, so this
// counts on the whitespace split directly.
int mention_count(std::string_view text) {
  int count = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start + 1 && text[start] == '@') ++count;
  }
  return count;
}

void check_len(const Eigen::VectorXd& v, int want, const char* slice) {
  if (v.size() != want)
    throw DataError(std::string("feature slice '") + slice + "' has length " +
                    std::to_string(v.size()) + ", expected " + std::to_string(want));
}

}  // namespace

std::vector<std::string> ModalityLayout::names() {
  std::vector<std::string> out;
  out.reserve(kTotal);
  const char* social[] = {"followers",  "friends",       "favourites",
                          "listed",     "statuses",      "tweet_count",
                          "char_length", "retweet_count", "mention_count"};
  for (const char* n : social) out.emplace_back(n);
  for (int h = 0; h < 24; ++h) out.push_back("hour_" + std::to_string(h));
  const char* emotion[] = {"emoji_pos", "emoji_neu", "emoji_neg",
                           "valence",   "arousal",   "dominance",
                           "fp_singular", "fp_plural"};
  for (const char* n : emotion) out.emplace_back(n);
  for (int k = 0; k < kTopicLen; ++k) out.push_back("topic_" + std::to_string(k));
  for (int s = 0; s < kDomainLen - 1; ++s)
    out.push_back("symptom_" + std::to_string(s));
  out.emplace_back("antidepressant");
  return out;
}

Eigen::VectorXd social_features(const corpus::UserRecord& user) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(ModalityLayout::kSocialLen);
  v(0) = static_cast<double>(user.followers);
  v(1) = static_cast<double>(user.friends);
  v(2) = static_cast<double>(user.favourites);
  v(3) = static_cast<double>(user.listed);
  v(4) = static_cast<double>(user.statuses);
  v(5) = static_cast<double>(user.tweets.size());

  std::int64_t chars = 0;
  std::int64_t retweets = 0;
  std::int64_t mentions = 0;
  for (const auto& tweet : user.tweets) {
    chars += static_cast<std::int64_t>(tweet.text.size());
    retweets += tweet.is_retweet ? 1 : 0;
    mentions += mention_count(tweet.text);
    v(9 + corpus::hour_of_day(tweet.timestamp)) += 1.0;
  }
  v(6) = static_cast<double>(chars);
  v(7) = static_cast<double>(retweets);
  v(8) = static_cast<double>(mentions);
  return v;
}

Eigen::VectorXd emotion_features(const corpus::UserRecord& user,
                                 const lex::EmojiLexicon& emoji,
                                 const lex::VadLexicon& vad) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(ModalityLayout::kEmotionLen);
  for (const auto& tweet : user.tweets) {
    const auto counts = emoji.count(tweet.text);
    v(0) += counts.positive;
    v(1) += counts.neutral;
    v(2) += counts.negative;
    for (const auto& token : corpus::raw_tokens(tweet.text)) {
      if (const lex::VadScore* score = vad.find(token)) {
        v(3) += score->valence;
        v(4) += score->arousal;
        v(5) += score->dominance;
      }
      for (auto p : lex::kFirstPersonSingular)
        if (token == p) v(6) += 1.0;
      for (auto p : lex::kFirstPersonPlural)
        if (token == p) v(7) += 1.0;
    }
  }
  return v;
}

Eigen::VectorXd topic_features(const corpus::UserRecord& user,
                               const topics::LdaModel& model,
                               const corpus::StopwordSet& stopwords) {
  if (model.config().topics != ModalityLayout::kTopicLen)
    throw UsageError("topic model has " + std::to_string(model.config().topics) +
                     " topics; the feature layout needs " +
                     std::to_string(ModalityLayout::kTopicLen));
  std::vector<std::string> doc;
  for (const auto& tweet : user.tweets) {
    auto tokens = corpus::preprocess_tweet(tweet.text, stopwords).tokens;
    doc.insert(doc.end(), std::make_move_iterator(tokens.begin()),
               std::make_move_iterator(tokens.end()));
  }
  // Sorting makes the slice a function of the user's bag of words: tweet
  // order and in-tweet order cannot move the inference result.
  std::sort(doc.begin(), doc.end());
  return topics::infer_doc_topics(model, doc);
}

Eigen::VectorXd domain_features(const corpus::UserRecord& user,
                                const lex::SymptomLexicon& symptoms,
                                const lex::AntidepressantLexicon& antidep) {
  if (symptoms.category_count() !=
      static_cast<std::size_t>(ModalityLayout::kDomainLen) - 1)
    throw UsageError("symptom lexicon has " +
                     std::to_string(symptoms.category_count()) +
                     " categories; the feature layout needs " +
                     std::to_string(ModalityLayout::kDomainLen - 1));
  Eigen::VectorXd v = Eigen::VectorXd::Zero(ModalityLayout::kDomainLen);
  for (const auto& tweet : user.tweets) {
    const auto tokens = corpus::raw_tokens(tweet.text);
    const auto counts = symptoms.match_counts(tokens);
    for (std::size_t c = 0; c < counts.size(); ++c)
      v(static_cast<Eigen::Index>(c)) += counts[c];
    v(ModalityLayout::kDomainLen - 1) += antidep.match_count(tokens);
  }
  return v;
}

FeatureVector assemble(const corpus::UserRecord& user,
                       const lex::EmojiLexicon& emoji, const lex::VadLexicon& vad,
                       const topics::LdaModel& model,
                       const corpus::StopwordSet& stopwords,
                       const lex::SymptomLexicon& symptoms,
                       const lex::AntidepressantLexicon& antidep) {
  const Eigen::VectorXd s = social_features(user);
  const Eigen::VectorXd e = emotion_features(user, emoji, vad);
  const Eigen::VectorXd t = topic_features(user, model, stopwords);
  const Eigen::VectorXd d = domain_features(user, symptoms, antidep);
  check_len(s, ModalityLayout::kSocialLen, "social");
  check_len(e, ModalityLayout::kEmotionLen, "emotion");
  check_len(t, ModalityLayout::kTopicLen, "topic");
  check_len(d, ModalityLayout::kDomainLen, "domain");

  FeatureVector out;
  out.values.resize(ModalityLayout::kTotal);
  out.values.segment(ModalityLayout::kSocialOffset, ModalityLayout::kSocialLen) = s;
  out.values.segment(ModalityLayout::kEmotionOffset, ModalityLayout::kEmotionLen) = e;
  out.values.segment(ModalityLayout::kTopicOffset, ModalityLayout::kTopicLen) = t;
  out.values.segment(ModalityLayout::kDomainOffset, ModalityLayout::kDomainLen) = d;
  if (!out.values.allFinite()) throw DataError("non-finite feature value");
  return out;
}

NormStats fit_norm(const std::vector<FeatureVector>& train) {
  if (train.empty()) throw UsageError("cannot fit normalization on zero vectors");
  const Eigen::Index dim = train.front().values.size();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  for (const auto& v : train) {
    if (v.values.size() != dim) throw DataError("inconsistent feature lengths");
    mean += v.values;
  }
  mean /= static_cast<double>(train.size());

  Eigen::VectorXd var = Eigen::VectorXd::Zero(dim);
  for (const auto& v : train) var += (v.values - mean).cwiseAbs2();
  var /= static_cast<double>(train.size());

  NormStats stats;
  stats.mean = mean;
  stats.std_dev = var.cwiseSqrt().cwiseMax(kStdFloor);
  return stats;
}

FeatureVector apply_norm(const FeatureVector& v, const NormStats& stats) {
  if (v.values.size() != stats.mean.size())
    throw UsageError("feature/stats length mismatch");
  FeatureVector out;
  out.values = (v.values - stats.mean).cwiseQuotient(stats.std_dev);
  return out;
}

void apply_mask(Eigen::VectorXd& values, const ModalityMask& mask) {
  if (values.size() != ModalityLayout::kTotal)
    throw UsageError("mask expects a full-layout vector");
  if (!mask.social)
    values.segment(ModalityLayout::kSocialOffset, ModalityLayout::kSocialLen)
        .setZero();
  if (!mask.emotion)
    values.segment(ModalityLayout::kEmotionOffset, ModalityLayout::kEmotionLen)
        .setZero();
  if (!mask.topic)
    values.segment(ModalityLayout::kTopicOffset, ModalityLayout::kTopicLen)
        .setZero();
  if (!mask.domain)
    values.segment(ModalityLayout::kDomainOffset, ModalityLayout::kDomainLen)
        .setZero();
}

void write_features_csv(const std::string& path,
                        const std::vector<std::string>& user_ids,
                        const std::vector<FeatureVector>& rows) {
  if (user_ids.size() != rows.size())
    throw UsageError("user id / feature row count mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "user_id";
  for (const auto& name : ModalityLayout::names()) out << ',' << name;
  out << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << user_ids[i];
    for (Eigen::Index j = 0; j < rows[i].values.size(); ++j)
      out << ',' << rows[i].values(j);
    out << '\n';
  }
  if (!out) throw IoError("short write to " + path);
}

}  // namespace mdhan::features
