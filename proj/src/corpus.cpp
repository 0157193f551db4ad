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

#include "mdhan/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "mdhan/errors.hpp"
#include "mdhan/prng.hpp"

namespace mdhan::corpus {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// timestamps

namespace {

// Civil-date conversions (proleptic Gregorian), valid far beyond the range
// any corpus will use.
std::int64_t days_from_civil(std::int64_t y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const int yoe = static_cast<int>(y - era * 400);
  const int doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const int doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const int doe = static_cast<int>(z - era * 146097);
  const int yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yr = yoe + era * 400;
  const int doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const int mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = yr + (m <= 2);
}

bool all_digits(std::string_view s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

int to_int(std::string_view s) {
  int v = 0;
  for (char c : s) v = v * 10 + (c - '0');
  return v;
}

}  // namespace

std::int64_t parse_timestamp(std::string_view iso) {
  // Strict "YYYY-MM-DDTHH:MM:SSZ".
  if (iso.size() != 20 || iso[4] != '-' || iso[7] != '-' || iso[10] != 'T' ||
      iso[13] != ':' || iso[16] != ':' || iso[19] != 'Z' ||
      !all_digits(iso.substr(0, 4)) || !all_digits(iso.substr(5, 2)) ||
      !all_digits(iso.substr(8, 2)) || !all_digits(iso.substr(11, 2)) ||
      !all_digits(iso.substr(14, 2)) || !all_digits(iso.substr(17, 2))) {
    throw DataError("unparseable timestamp: '" + std::string(iso) + "'");
  }
  const int year = to_int(iso.substr(0, 4));
  const int month = to_int(iso.substr(5, 2));
  const int day = to_int(iso.substr(8, 2));
  const int hh = to_int(iso.substr(11, 2));
  const int mm = to_int(iso.substr(14, 2));
  const int ss = to_int(iso.substr(17, 2));
  if (month < 1 || month > 12 || day < 1 || day > 31 || hh > 23 || mm > 59 || ss > 59) {
    throw DataError("timestamp field out of range: '" + std::string(iso) + "'");
  }
  return days_from_civil(year, month, day) * 86400 + hh * 3600 + mm * 60 + ss;
}

std::string format_timestamp(std::int64_t epoch_seconds) {
  std::int64_t days = epoch_seconds / 86400;
  std::int64_t rem = epoch_seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  std::int64_t y;
  int m, d;
  civil_from_days(days, y, m, d);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04lld-%02d-%02dT%02lld:%02lld:%02lldZ",
                static_cast<long long>(y), m, d, static_cast<long long>(rem / 3600),
                static_cast<long long>((rem % 3600) / 60),
                static_cast<long long>(rem % 60));
  return buf;
}

int hour_of_day(std::int64_t epoch_seconds) {
  std::int64_t rem = epoch_seconds % 86400;
  if (rem < 0) rem += 86400;
  return static_cast<int>(rem / 3600);
}

// ---------------------------------------------------------------------------
// tokenization

namespace {

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_punct(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

bool is_url_token(std::string_view t) {
  return t.starts_with("http://") || t.starts_with("https://") || t.starts_with("www.");
}

// Applies rules 3-7 of the table in corpus.hpp to one lowercased token.
// Returns an empty string when the token is dropped.
std::string clean_token(std::string_view raw) {
  if (raw.empty()) return {};
  if (is_url_token(raw)) return {};
  if (raw[0] == '@') return {};
  while (!raw.empty() && raw[0] == '#') raw.remove_prefix(1);
  std::string t;
  t.reserve(raw.size());
  for (char c : raw) {
    const auto u = static_cast<unsigned char>(c);
    if (u >= 0x20 && u <= 0x7e) t.push_back(c);
  }
  std::size_t begin = 0, end = t.size();
  while (begin < end && is_ascii_punct(t[begin])) ++begin;
  while (end > begin && is_ascii_punct(t[end - 1])) --end;
  return t.substr(begin, end - begin);
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string lowered(text);
  for (char& c : lowered) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  std::size_t i = 0;
  const std::size_t n = lowered.size();
  while (i < n) {
    while (i < n && is_ascii_space(lowered[i])) ++i;
    std::size_t start = i;
    while (i < n && !is_ascii_space(lowered[i])) ++i;
    if (i > start) {
      std::string tok = clean_token(std::string_view(lowered).substr(start, i - start));
      if (!tok.empty()) out.push_back(std::move(tok));
    }
  }
  return out;
}

}  // namespace

TokenizedTweet preprocess_tweet(std::string_view text, const StopwordSet& stopwords,
                                std::size_t n_max) {
  TokenizedTweet result;
  for (auto& tok : tokenize(text)) {
    if (stopwords.count(tok)) continue;
    result.tokens.push_back(std::move(tok));
    if (result.tokens.size() == n_max) break;
  }
  return result;
}

std::vector<std::string> raw_tokens(std::string_view text) { return tokenize(text); }

StopwordSet load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stopword file: " + path);
  StopwordSet set;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) set.insert(line);
  }
  return set;
}

// ---------------------------------------------------------------------------
// corpus IO

namespace {

std::int64_t get_count(const json& j, const char* key, int line) {
  if (!j.contains(key) || !j[key].is_number_integer()) {
    throw DataError("line " + std::to_string(line) + ": missing or non-integer '" +
                    key + "'");
  }
  const std::int64_t v = j[key].get<std::int64_t>();
  if (v < 0) {
    throw DataError("line " + std::to_string(line) + ": negative '" + std::string(key) +
                    "'");
  }
  return v;
}

UserRecord user_from_json(const json& j, int line) {
  UserRecord u;
  if (!j.is_object()) throw DataError("line " + std::to_string(line) + ": not an object");
  if (!j.contains("user_id") || !j["user_id"].is_string()) {
    throw DataError("line " + std::to_string(line) + ": missing 'user_id'");
  }
  u.user_id = j["user_id"].get<std::string>();
  if (!j.contains("label") || !j["label"].is_number_integer()) {
    throw DataError("line " + std::to_string(line) + ": missing 'label'");
  }
  u.label = j["label"].get<int>();
  if (u.label != 0 && u.label != 1) {
    throw DataError("line " + std::to_string(line) + ": label must be 0 or 1");
  }
  u.followers = get_count(j, "followers", line);
  u.friends = get_count(j, "friends", line);
  u.favourites = get_count(j, "favourites", line);
  u.listed = get_count(j, "listed", line);
  u.statuses = get_count(j, "statuses", line);
  if (!j.contains("tweets") || !j["tweets"].is_array()) {
    throw DataError("line " + std::to_string(line) + ": missing 'tweets' array");
  }
  for (const auto& tj : j["tweets"]) {
    TweetRecord t;
    if (!tj.contains("text") || !tj["text"].is_string()) {
      throw DataError("line " + std::to_string(line) + ": tweet missing 'text'");
    }
    t.text = tj["text"].get<std::string>();
    bool blank = true;
    for (char c : t.text) {
      if (!is_ascii_space(c)) {
        blank = false;
        break;
      }
    }
    if (blank) {
      throw DataError("line " + std::to_string(line) + ": tweet text empty after trimming");
    }
    if (!tj.contains("timestamp") || !tj["timestamp"].is_string()) {
      throw DataError("line " + std::to_string(line) + ": tweet missing 'timestamp'");
    }
    try {
      t.timestamp = parse_timestamp(tj["timestamp"].get<std::string>());
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line) + ": " + e.what());
    }
    t.is_retweet = tj.value("is_retweet", false);
    u.tweets.push_back(std::move(t));
  }
  std::stable_sort(u.tweets.begin(), u.tweets.end(),
                   [](const TweetRecord& a, const TweetRecord& b) {
                     return a.timestamp < b.timestamp;
                   });
  return u;
}

json user_to_json(const UserRecord& u) {
  json tweets = json::array();
  for (const auto& t : u.tweets) {
    tweets.push_back({{"text", t.text},
                      {"timestamp", format_timestamp(t.timestamp)},
                      {"is_retweet", t.is_retweet}});
  }
  return json{{"user_id", u.user_id}, {"label", u.label},
              {"followers", u.followers}, {"friends", u.friends},
              {"favourites", u.favourites}, {"listed", u.listed},
              {"statuses", u.statuses}, {"tweets", std::move(tweets)}};
}

}  // namespace

UserRecord parse_user(std::string_view json_line) {
  json j = json::parse(json_line, nullptr, true);
  return user_from_json(j, 0);
}

std::string serialize_user(const UserRecord& user) { return user_to_json(user).dump(); }

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file: " + path);
  Corpus corpus;
  corpus.name = path;
  std::unordered_map<std::string, int> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError("line " + std::to_string(lineno) + ": malformed JSON: " + e.what());
    }
    UserRecord u = user_from_json(j, lineno);
    auto [it, inserted] = seen.emplace(u.user_id, lineno);
    if (!inserted) {
      throw DataError("line " + std::to_string(lineno) + ": duplicate user_id '" +
                      u.user_id + "' (first seen at line " + std::to_string(it->second) +
                      ")");
    }
    corpus.users.push_back(std::move(u));
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write corpus file: " + path);
  for (const auto& u : corpus.users) out << serialize_user(u) << '\n';
}

// ---------------------------------------------------------------------------
// filtering and splitting

Corpus filter_users(const Corpus& corpus, std::int64_t min_posts,
                    std::int64_t max_followers) {
  if (min_posts < 1) throw UsageError("filter_users: min_posts must be >= 1");
  Corpus out;
  out.name = corpus.name;
  for (const auto& u : corpus.users) {
    if (static_cast<std::int64_t>(u.tweets.size()) >= min_posts &&
        u.followers <= max_followers) {
      out.users.push_back(u);
    }
  }
  if (out.users.empty()) {
    out.warning = "filter_users: no users left (min_posts=" + std::to_string(min_posts) +
                  ", max_followers=" + std::to_string(max_followers) + ")";
  }
  return out;
}

std::pair<Corpus, Corpus> split(const Corpus& corpus, const SplitSpec& spec) {
  if (spec.train_fraction <= 0.0 || spec.train_fraction >= 1.0) {
    throw UsageError("split: train_fraction must lie in (0,1)");
  }
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < corpus.users.size(); ++i) {
    by_class[corpus.users[i].label].push_back(i);
  }
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < 2) {
      throw DataError("split: class " + std::to_string(c) + " has fewer than 2 users");
    }
  }
  std::vector<bool> in_train(corpus.users.size(), false);
  for (int c = 0; c < 2; ++c) {
    auto engine = make_engine(spec.seed, "split", static_cast<std::uint64_t>(c));
    auto idx = by_class[c];
    shuffle_vec(idx, engine);
    auto n_train = static_cast<std::size_t>(
        std::llround(spec.train_fraction * static_cast<double>(idx.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
    for (std::size_t i = 0; i < n_train; ++i) in_train[idx[i]] = true;
  }
  Corpus train, test;
  train.name = corpus.name + ".train";
  test.name = corpus.name + ".test";
  for (std::size_t i = 0; i < corpus.users.size(); ++i) {
    (in_train[i] ? train : test).users.push_back(corpus.users[i]);
  }
  return {std::move(train), std::move(test)};
}

// ---------------------------------------------------------------------------
// synthetic corpus

namespace {

// Signal tokens are a subset of the shipped symptom seed lexicon so that the
// domain-feature slice lights up on the same corpora.
const std::vector<std::string> kSignalVocab = {
    "sad",        "hopeless",  "depressed", "miserable", "crying",
    "empty",      "despair",   "bored",     "apathy",    "unmotivated",
    "appetite",   "insomnia",  "sleepless", "nightmares", "restless",
    "sluggish",   "fatigue",   "tired",     "exhausted", "drained",
    "weary",      "worthless", "guilty",    "ashamed",   "useless",
    "indecisive", "unfocused", "forgetful", "suicidal",  "lifeless"};

const std::vector<std::string> kNeutralVocab = {
    "coffee",   "morning", "weather",  "lunch",    "traffic",  "music",
    "game",     "movie",   "team",     "office",   "weekend",  "recipe",
    "garden",   "photo",   "beach",    "friday",   "concert",  "puppy",
    "bicycle",  "pizza",   "football", "painting", "market",   "holiday",
    "sunshine", "dinner",  "kitchen",  "airport",  "meeting",  "laptop",
    "camera",   "guitar",  "running",  "hiking",   "book",     "series",
    "episode",  "coach",   "score",    "goal",     "salad",    "burger",
    "bakery",   "museum",  "gallery",  "river",    "mountain", "winter",
    "summer",   "autumn"};

const std::vector<std::string> kNegativeEmoji = {"\U0001F61E", "\U0001F622",
                                                 "\U0001F62D"};  // 😞 😢 😭
const std::vector<std::string> kPositiveEmoji = {"\U0001F60A", "\U0001F600",
                                                 "\U0001F44D"};  // 😊 😀 👍

const std::unordered_set<std::string> kSignalVocabSet(kSignalVocab.begin(),
                                                      kSignalVocab.end());

}  // namespace

const std::vector<std::string>& synth_signal_vocabulary() { return kSignalVocab; }
const std::vector<std::string>& synth_neutral_vocabulary() { return kNeutralVocab; }

bool is_signal_tweet(const TweetRecord& tweet) {
  for (const auto& tok : raw_tokens(tweet.text)) {
    if (kSignalVocabSet.count(tok)) return true;
  }
  return false;
}

Corpus synth_corpus(const SynthSpec& spec) {
  if (spec.n_users == 0 || spec.n_users % 2 != 0) {
    throw UsageError("synth_corpus: n_users must be even and positive");
  }
  if (spec.tweets_min < 1 || spec.tweets_max < spec.tweets_min || spec.tokens_min < 1 ||
      spec.tokens_max < spec.tokens_min) {
    throw UsageError("synth_corpus: bad tweet/token ranges");
  }
  const std::int64_t base = parse_timestamp("2016-01-01T00:00:00Z");
  Corpus corpus;
  corpus.name = spec.name;
  corpus.users.reserve(spec.n_users);
  for (std::size_t u = 0; u < spec.n_users; ++u) {
    auto rng = make_engine(spec.seed, "synth-user", u);
    auto tweet_count = [&] { return uniform_range(rng, spec.tweets_min, spec.tweets_max); };
    auto token_count = [&] { return uniform_range(rng, spec.tokens_min, spec.tokens_max); };
    auto unit = [&] { return uniform_unit(rng); };

    UserRecord rec;
    char idbuf[16];
    std::snprintf(idbuf, sizeof idbuf, "u%05zu", u);
    rec.user_id = idbuf;
    rec.label = u < spec.n_users / 2 ? 1 : 0;
    rec.followers = 10 + static_cast<std::int64_t>(uniform_below(rng, 2500));
    rec.friends = 10 + static_cast<std::int64_t>(uniform_below(rng, 1500));
    rec.favourites = static_cast<std::int64_t>(uniform_below(rng, 5000));
    rec.listed = static_cast<std::int64_t>(uniform_below(rng, 50));

    const int n_tweets = static_cast<int>(tweet_count());
    rec.statuses = n_tweets + static_cast<std::int64_t>(uniform_below(rng, 500));
    rec.tweets.reserve(n_tweets);
    for (int j = 0; j < n_tweets; ++j) {
      const bool depressed = rec.label == 1;
      const bool signal = depressed && unit() < spec.text_signal;
      const auto& vocab = signal ? kSignalVocab : kNeutralVocab;

      std::string text;
      const int n_tok = static_cast<int>(token_count());
      for (int k = 0; k < n_tok; ++k) {
        if (k > 0) text += ' ';
        text += vocab[uniform_below(rng, vocab.size())];
      }
      if (unit() < spec.emoji_signal) {
        const auto& pool = depressed ? kNegativeEmoji : kPositiveEmoji;
        text += ' ';
        text += pool[uniform_below(rng, pool.size())];
      }

      int hour;
      if (depressed && unit() < spec.hour_signal) {
        hour = static_cast<int>(uniform_below(rng, 5));  // night posting, 00:00-04:59
      } else {
        hour = static_cast<int>(uniform_below(rng, 24));
      }
      const int minute = static_cast<int>(uniform_below(rng, 60));

      TweetRecord t;
      t.text = std::move(text);
      // one tweet per day keeps timestamps strictly ascending under any hour
      t.timestamp = base + (static_cast<std::int64_t>(u) * 400 + j) * 86400 +
                    hour * 3600 + minute * 60;
      t.is_retweet = unit() < 0.08;
      rec.tweets.push_back(std::move(t));
    }
    corpus.users.push_back(std::move(rec));
  }
  return corpus;
}

Corpus synth_corpus(std::size_t n_users, double signal, std::uint64_t seed) {
  SynthSpec spec;
  spec.n_users = n_users;
  spec.text_signal = signal;
  spec.hour_signal = signal;
  spec.emoji_signal = signal;
  spec.seed = seed;
  return synth_corpus(spec);
}

}  // namespace mdhan::corpus
