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

#ifndef MDHAN_EXPLAIN_HPP
#define MDHAN_EXPLAIN_HPP

#include <string>
#include <vector>

#include "mdhan/corpus.hpp"
#include "mdhan/lexicons.hpp"
#include "mdhan/model.hpp"

namespace mdhan::explain {

// One token with the word-attention weight it received. `position` is the
// token's index within its tweet before ranking.
struct RankedToken {
  std::string token;
  double weight = 0.0;
  int position = 0;
};

// One tweet with its tweet-attention weight and its tokens ranked by word
// attention. `position` is the tweet's index in the user's timeline.
// Tweets that lost every token to preprocessing keep weight 0 and no tokens.
struct RankedTweet {
  std::string text;
  double weight = 0.0;
  int position = 0;
  std::vector<RankedToken> tokens;
};

struct AttentionReport {
  std::string user_id;
  double prediction = 0.0;  // sigmoid output of the same forward pass
  std::vector<RankedTweet> tweets;  // descending weight, ties by position
};

// Runs one dropout-free forward pass and copies its attention weights into a
// report — the weights are exactly the ones behind `prediction`, never a
// recomputation. `texts[i]` is the display text and `tokens[i]` the token
// strings for user.tweets[i] (same length). Throws UsageError when the
// shapes disagree, when the text branch is off, or when word max-pooling is
// on (pooled weights no longer map one-to-one onto tokens).
AttentionReport extract_attention(const model::ModelParams& params,
                                  const model::TrainUser& user,
                                  const std::vector<std::string>& texts,
                                  const std::vector<std::vector<std::string>>& tokens);

// Self-contained static page: inline styles only, tokens highlighted with
// opacity proportional to their weight (scaled per tweet so the top token is
// fully saturated). Pure function of the report — identical reports render
// byte-identically.
std::string render_html(const AttentionReport& report);

std::string to_json(const AttentionReport& report);  // schema in README

void write_attention_json(const std::string& path,
                          const AttentionReport& report);
void write_attention_html(const std::string& path,
                          const AttentionReport& report);

// ---------------------------------------------------------------------------
// symptom word clouds

struct TokenCount {
  std::string token;
  int count = 0;
};

// One symptom category: every tweet mentioning a category keyword is pooled,
// and the pooled tweets' preprocessed tokens are counted. `mentions` is the
// total keyword hit count across the corpus, used to rank categories.
struct CategoryCloud {
  std::string category;
  int mentions = 0;
  std::vector<TokenCount> tokens;  // descending count, ties lexicographic
};

struct WordCloudData {
  std::vector<CategoryCloud> categories;  // descending mentions, ties by name
};

// Counts keyword mentions on raw tokens (stopwords intact, so multi-word
// phrases survive) and cloud tokens on preprocessed tweets (stopwords
// removed, untruncated). Categories with no matching tweet come back empty.
// top_n < 0 throws UsageError; top_n caps each category's token list.
WordCloudData symptom_wordclouds(const std::vector<corpus::UserRecord>& users,
                                 const lex::SymptomLexicon& symptoms,
                                 const corpus::StopwordSet& stopwords,
                                 int top_n);

// "category,token,count" rows in category rank order.
void write_wordcloud_csv(const std::string& path, const WordCloudData& data);

}  // namespace mdhan::explain

#endif  // MDHAN_EXPLAIN_HPP
