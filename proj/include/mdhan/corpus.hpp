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

#ifndef MDHAN_CORPUS_HPP
#define MDHAN_CORPUS_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace mdhan::corpus {

// Hard cap on tokens kept per tweet after preprocessing.
inline constexpr std::size_t kMaxTokensPerTweet = 30;

struct TweetRecord {
  std::string text;
  std::int64_t timestamp = 0;  // seconds since Unix epoch, UTC
  bool is_retweet = false;
};

struct UserRecord {
  std::string user_id;
  int label = 0;  // 1 = depressed, 0 = not depressed
  std::int64_t followers = 0;
  std::int64_t friends = 0;
  std::int64_t favourites = 0;
  std::int64_t listed = 0;
  std::int64_t statuses = 0;
  std::vector<TweetRecord> tweets;  // kept sorted by ascending timestamp
};

struct Corpus {
  std::string name;
  std::vector<UserRecord> users;  // user_ids unique
  std::string warning;            // set instead of erroring, e.g. empty filter result
};

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

struct TokenizedTweet {
  std::vector<std::string> tokens;
};

using StopwordSet = std::unordered_set<std::string>;

// Timestamps are ISO 8601 UTC, e.g. "2016-03-01T09:30:00Z".
std::int64_t parse_timestamp(std::string_view iso);
std::string format_timestamp(std::int64_t epoch_seconds);
int hour_of_day(std::int64_t epoch_seconds);  // UTC hour, 0..23

StopwordSet load_stopwords(const std::string& path);

// One JSON object per line; see README for the schema. Tweets are returned
// sorted by timestamp. Malformed lines and duplicate user ids raise DataError
// with the offending line number / id.
Corpus load_corpus(const std::string& path);
void save_corpus(const Corpus& corpus, const std::string& path);
std::string serialize_user(const UserRecord& user);  // one JSONL line, no '\n'
UserRecord parse_user(std::string_view json_line);

// Tokenization rule table, applied in order:
//   1. lowercase ASCII letters
//   2. split on ASCII whitespace
//   3. drop URL tokens (http://, https://, www. prefixes)
//   4. drop @mention tokens; strip leading '#'
//   5. delete non-ASCII-printable bytes
//   6. strip leading/trailing ASCII punctuation
//   7. drop tokens that became empty
// preprocess_tweet() then removes stopwords and truncates to n_max;
// raw_tokens() keeps stopwords and the full length (lexicon counting needs
// pronouns and phrase interiors that the stopword list would delete).
TokenizedTweet preprocess_tweet(std::string_view text, const StopwordSet& stopwords,
                                std::size_t n_max = kMaxTokensPerTweet);
std::vector<std::string> raw_tokens(std::string_view text);

// Keeps users with at least min_posts tweets and at most max_followers
// followers. An empty result is reported via Corpus::warning, not an error.
Corpus filter_users(const Corpus& corpus, std::int64_t min_posts = 10,
                    std::int64_t max_followers = 5000);

// Deterministic stratified split; train fraction per class within one user of
// the global fraction. Requires at least two users in each class.
std::pair<Corpus, Corpus> split(const Corpus& corpus, const SplitSpec& spec);

// Synthetic corpus generator. Signal can be planted per channel:
//   text_signal  — probability a depressed user's tweet draws all its tokens
//                  from the symptom vocabulary instead of the neutral one
//   hour_signal  — probability a depressed user's tweet is posted at night
//   emoji_signal — probability a tweet carries a class-polarized emoji
// All channels at zero produce label-independent data.
struct SynthSpec {
  std::size_t n_users = 64;  // must be even; classes are balanced
  double text_signal = 0.0;
  double hour_signal = 0.0;
  double emoji_signal = 0.0;
  std::uint64_t seed = 0;
  int tweets_min = 8;
  int tweets_max = 12;
  int tokens_min = 4;
  int tokens_max = 9;
  std::string name = "synth";
};

Corpus synth_corpus(const SynthSpec& spec);
// Single-knob form: sets all three channels to `signal`.
Corpus synth_corpus(std::size_t n_users, double signal, std::uint64_t seed);

// Vocabularies the generator draws from; exposed so tests and the
// explanation fidelity checks can tell signal tweets from noise tweets.
const std::vector<std::string>& synth_signal_vocabulary();
const std::vector<std::string>& synth_neutral_vocabulary();
bool is_signal_tweet(const TweetRecord& tweet);

}  // namespace mdhan::corpus

#endif  // MDHAN_CORPUS_HPP
