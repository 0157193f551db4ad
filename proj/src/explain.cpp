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

#include "mdhan/explain.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mdhan/errors.hpp"

namespace mdhan::explain {

namespace {

// fixed six decimals so identical weights always print identically
std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

std::string escape_html(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

// descending weight; equal weights keep timeline/reading order
template <typename T>
void rank(std::vector<T>& items) {
  std::sort(items.begin(), items.end(), [](const T& a, const T& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.position < b.position;
  });
}

}  // namespace

AttentionReport extract_attention(
    const model::ModelParams& params, const model::TrainUser& user,
    const std::vector<std::string>& texts,
    const std::vector<std::vector<std::string>>& tokens) {
  if (!params.config.use_text)
    throw UsageError("attention extraction needs the text branch enabled");
  if (params.config.max_pool_words > 0)
    throw UsageError(
        "attention extraction needs word max-pooling off: pooled weights do "
        "not map one-to-one onto tokens");
  if (texts.size() != user.tweets.size() || tokens.size() != user.tweets.size())
    throw UsageError("tweet text/token lists must match the user's tweets");
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (tokens[i].size() != user.tweets[i].size())
      throw UsageError("token strings for tweet " + std::to_string(i) +
                       " do not match its token ids");

  const model::UserEncoding enc = model::encode_user(params, user);

  AttentionReport report;
  report.user_id = user.user_id;
  report.prediction = enc.yhat;
  report.tweets.reserve(user.tweets.size());
  for (std::size_t i = 0; i < user.tweets.size(); ++i) {
    RankedTweet tweet;
    tweet.text = texts[i];
    tweet.weight = enc.tweet_attn[i];
    tweet.position = static_cast<int>(i);
    tweet.tokens.reserve(tokens[i].size());
    for (std::size_t w = 0; w < tokens[i].size(); ++w)
      tweet.tokens.push_back({tokens[i][w], enc.word_attn[i][w],
                              static_cast<int>(w)});
    rank(tweet.tokens);
    report.tweets.push_back(std::move(tweet));
  }
  rank(report.tweets);
  return report;
}

std::string render_html(const AttentionReport& report) {
  std::ostringstream out;
  out << "<!doctype html>\n<html lang=\"en\">\n<head>\n"
      << "<meta charset=\"utf-8\">\n"
      << "<title>attention &mdash; " << escape_html(report.user_id)
      << "</title>\n"
      << "<style>\n"
      << "body{font-family:sans-serif;max-width:48rem;margin:2rem auto;"
      << "color:#222;}\n"
      << ".tweet{border:1px solid #ddd;border-radius:6px;padding:.6rem .8rem;"
      << "margin:.6rem 0;}\n"
      << ".meta{font-size:.8rem;color:#666;margin-bottom:.3rem;}\n"
      << ".tok{padding:.1rem .2rem;border-radius:3px;margin-right:.15rem;"
      << "display:inline-block;}\n"
      << ".empty{color:#999;font-style:italic;}\n"
      << "</style>\n</head>\n<body>\n"
      << "<h1>" << escape_html(report.user_id) << "</h1>\n"
      << "<p>prediction " << fmt(report.prediction) << "</p>\n";

  for (std::size_t r = 0; r < report.tweets.size(); ++r) {
    const RankedTweet& tweet = report.tweets[r];
    out << "<div class=\"tweet\">\n<div class=\"meta\">rank " << (r + 1)
        << " &middot; tweet " << (tweet.position + 1) << " &middot; weight "
        << fmt(tweet.weight) << "</div>\n";
    if (tweet.tokens.empty()) {
      out << "<span class=\"empty\">no content</span>\n";
    } else {
      double top = 0.0;
      for (const RankedToken& t : tweet.tokens) top = std::max(top, t.weight);
      // restore reading order for display; the report itself stays ranked
      std::vector<RankedToken> in_order = tweet.tokens;
      std::sort(in_order.begin(), in_order.end(),
                [](const RankedToken& a, const RankedToken& b) {
                  return a.position < b.position;
                });
      for (const RankedToken& t : in_order) {
        const double opacity = top > 0.0 ? t.weight / top : 0.0;
        out << "<span class=\"tok\" style=\"background:rgba(255,160,0,"
            << fmt(opacity) << ")\" title=\"" << fmt(t.weight) << "\">"
            << escape_html(t.token) << "</span>";
      }
      out << '\n';
    }
    out << "</div>\n";
  }
  out << "</body>\n</html>\n";
  return out.str();
}

std::string to_json(const AttentionReport& report) {
  nlohmann::json tweets = nlohmann::json::array();
  for (const RankedTweet& tweet : report.tweets) {
    nlohmann::json tokens = nlohmann::json::array();
    for (const RankedToken& t : tweet.tokens)
      tokens.push_back({{"token", t.token},
                        {"weight", t.weight},
                        {"position", t.position}});
    tweets.push_back({{"text", tweet.text},
                      {"weight", tweet.weight},
                      {"position", tweet.position},
                      {"tokens", std::move(tokens)}});
  }
  nlohmann::json j{{"user_id", report.user_id},
                   {"prediction", report.prediction},
                   {"tweets", std::move(tweets)}};
  return j.dump(2);
}

void write_attention_json(const std::string& path,
                          const AttentionReport& report) {
  auto out = open_out(path);
  out << to_json(report) << '\n';
}

void write_attention_html(const std::string& path,
                          const AttentionReport& report) {
  open_out(path) << render_html(report);
}

WordCloudData symptom_wordclouds(const std::vector<corpus::UserRecord>& users,
                                 const lex::SymptomLexicon& symptoms,
                                 const corpus::StopwordSet& stopwords,
                                 int top_n) {
  if (top_n < 0) throw UsageError("word-cloud size must be non-negative");

  const std::size_t n_cat = symptoms.category_count();
  std::vector<int> mentions(n_cat, 0);
  // std::map keeps per-category tallies in a deterministic order
  std::vector<std::map<std::string, int>> tallies(n_cat);

  for (const corpus::UserRecord& user : users) {
    for (const corpus::TweetRecord& tweet : user.tweets) {
      const std::vector<int> hits =
          symptoms.match_counts(corpus::raw_tokens(tweet.text));
      std::vector<std::string> cleaned;  // tokenized lazily, at most once
      bool tokenized = false;
      for (std::size_t c = 0; c < n_cat; ++c) {
        if (hits[c] == 0) continue;
        mentions[c] += hits[c];
        if (!tokenized) {
          cleaned = corpus::preprocess_tweet(
                        tweet.text, stopwords,
                        std::numeric_limits<std::size_t>::max())
                        .tokens;
          tokenized = true;
        }
        for (const std::string& token : cleaned) ++tallies[c][token];
      }
    }
  }

  WordCloudData data;
  const auto& categories = symptoms.categories();
  for (std::size_t c = 0; c < n_cat; ++c) {
    CategoryCloud cloud;
    cloud.category = categories[c].name;
    cloud.mentions = mentions[c];
    cloud.tokens.reserve(tallies[c].size());
    for (const auto& [token, count] : tallies[c])
      cloud.tokens.push_back({token, count});
    // descending count; the map already delivered lexicographic order, which
    // stable_sort preserves among equal counts
    std::stable_sort(cloud.tokens.begin(), cloud.tokens.end(),
                     [](const TokenCount& a, const TokenCount& b) {
                       return a.count > b.count;
                     });
    if (static_cast<int>(cloud.tokens.size()) > top_n)
      cloud.tokens.resize(top_n);
    data.categories.push_back(std::move(cloud));
  }
  std::stable_sort(data.categories.begin(), data.categories.end(),
                   [](const CategoryCloud& a, const CategoryCloud& b) {
                     if (a.mentions != b.mentions) return a.mentions > b.mentions;
                     return a.category < b.category;
                   });
  return data;
}

void write_wordcloud_csv(const std::string& path, const WordCloudData& data) {
  auto out = open_out(path);
  out << "category,token,count\n";
  for (const CategoryCloud& cloud : data.categories)
    for (const TokenCount& t : cloud.tokens)
      out << cloud.category << ',' << t.token << ',' << t.count << '\n';
}

}  // namespace mdhan::explain
