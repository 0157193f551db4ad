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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "mdhan/errors.hpp"
#include "mdhan/explain.hpp"
#include "mdhan/prng.hpp"

using namespace mdhan;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int count_occurrences(const std::string& hay, const std::string& needle) {
  int n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos;
       pos = hay.find(needle, pos + needle.size()))
    ++n;
  return n;
}

model::ModelConfig text_config() {
  model::ModelConfig cfg;
  cfg.embed_dim = 4;
  cfg.hidden = 3;
  cfg.n_max = 6;
  cfg.l_max = 6;
  cfg.mlp_hidden = 3;
  cfg.batch = 2;
  cfg.seed = 31;
  cfg.use_features = false;
  return cfg;
}

Eigen::MatrixXd test_embeddings(int vocab, int dim, std::uint64_t seed) {
  auto rng = make_engine(seed, "test-embeddings");
  Eigen::MatrixXd table = ad::init_uniform(vocab + 1, dim, -0.5, 0.5, rng);
  table.row(vocab).setZero();
  return table;
}

model::TrainUser text_user(const std::string& id, int label,
                           std::vector<std::vector<int>> tweets) {
  model::TrainUser u;
  u.user_id = id;
  u.label = label;
  u.tweets = std::move(tweets);
  u.feats = Eigen::VectorXd::Zero(features::ModalityLayout::kTotal);
  return u;
}

// texts/token strings that line up with the given id matrix: token id k
// becomes the string "w<k>"
std::pair<std::vector<std::string>, std::vector<std::vector<std::string>>>
align_strings(const std::vector<std::vector<int>>& tweets) {
  std::vector<std::string> texts;
  std::vector<std::vector<std::string>> tokens;
  for (const auto& tweet : tweets) {
    std::vector<std::string> words;
    std::string text;
    for (int id : tweet) {
      words.push_back("w" + std::to_string(id));
      if (!text.empty()) text += ' ';
      text += words.back();
    }
    texts.push_back(std::move(text));
    tokens.push_back(std::move(words));
  }
  return {texts, tokens};
}

}  // namespace

TEST_CASE("attention report mirrors the classifying forward pass") {
  const auto cfg = text_config();
  const auto params = model::init_params(cfg, test_embeddings(5, 4, cfg.seed));
  const auto user = text_user("u1", 1, {{0, 1}, {2}, {3, 4, 0}});
  const auto [texts, tokens] = align_strings(user.tweets);

  const auto report = explain::extract_attention(params, user, texts, tokens);
  const auto enc = model::encode_user(params, user);

  CHECK(report.user_id == "u1");
  CHECK(report.prediction == enc.yhat);  // same forward pass, bit for bit
  REQUIRE(report.tweets.size() == 3);

  double tweet_sum = 0.0;
  for (std::size_t r = 0; r < report.tweets.size(); ++r) {
    const auto& tweet = report.tweets[r];
    // weights are copied from the encoding, never recomputed
    CHECK(tweet.weight == enc.tweet_attn[tweet.position]);
    tweet_sum += tweet.weight;
    if (r > 0) CHECK(report.tweets[r - 1].weight >= tweet.weight);

    REQUIRE(tweet.tokens.size() == user.tweets[tweet.position].size());
    double word_sum = 0.0;
    for (std::size_t w = 0; w < tweet.tokens.size(); ++w) {
      const auto& tok = tweet.tokens[w];
      CHECK(tok.weight == enc.word_attn[tweet.position][tok.position]);
      CHECK(tok.token ==
            "w" + std::to_string(user.tweets[tweet.position][tok.position]));
      word_sum += tok.weight;
      if (w > 0) CHECK(tweet.tokens[w - 1].weight >= tok.weight);
    }
    CHECK(word_sum == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(tweet_sum == doctest::Approx(1.0).epsilon(1e-9));

  // the top-ranked tweet can never fall below the uniform share
  CHECK(report.tweets[0].weight >= 1.0 / 3.0 - 1e-12);
}

TEST_CASE("equal weights rank by original position") {
  // zeroed parameters push every attention score to zero, so the softmax is
  // exactly uniform and every weight ties
  const auto cfg = text_config();
  auto params = model::init_params(cfg, test_embeddings(5, 4, cfg.seed));
  for (auto& [name, tensor] : params.tensors) tensor.setZero();

  const auto user = text_user("u2", 0, {{0, 1}, {2, 3}, {4, 0}});
  const auto [texts, tokens] = align_strings(user.tweets);
  const auto report = explain::extract_attention(params, user, texts, tokens);

  REQUIRE(report.tweets.size() == 3);
  CHECK(report.tweets[0].weight == report.tweets[1].weight);
  CHECK(report.tweets[1].weight == report.tweets[2].weight);
  for (int i = 0; i < 3; ++i) {
    CHECK(report.tweets[i].position == i);  // ties keep timeline order
    const auto& toks = report.tweets[i].tokens;
    REQUIRE(toks.size() == 2);
    CHECK(toks[0].weight == toks[1].weight);
    CHECK(toks[0].position == 0);  // ties keep reading order
    CHECK(toks[1].position == 1);
  }
}

TEST_CASE("empty tweets keep weight zero and render a placeholder") {
  const auto cfg = text_config();
  const auto params = model::init_params(cfg, test_embeddings(5, 4, cfg.seed));
  const auto user = text_user("u3", 1, {{}, {0, 1}});
  const std::vector<std::string> texts = {"", "w0 w1"};
  const std::vector<std::vector<std::string>> tokens = {{}, {"w0", "w1"}};

  const auto report = explain::extract_attention(params, user, texts, tokens);
  REQUIRE(report.tweets.size() == 2);
  // the only tweet with content takes all the weight and ranks first
  CHECK(report.tweets[0].position == 1);
  CHECK(report.tweets[0].weight == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(report.tweets[1].position == 0);
  CHECK(report.tweets[1].weight == 0.0);
  CHECK(report.tweets[1].tokens.empty());

  const auto html = explain::render_html(report);
  CHECK(html.find("no content") != std::string::npos);
}

TEST_CASE("extraction validates alignment and configuration") {
  const auto cfg = text_config();
  const auto params = model::init_params(cfg, test_embeddings(5, 4, cfg.seed));
  const auto user = text_user("u4", 0, {{0, 1}});

  // text/token lists must line up with the user's tweets
  CHECK_THROWS_AS(explain::extract_attention(params, user, {}, {}),
                  UsageError);
  CHECK_THROWS_AS(
      explain::extract_attention(params, user, {"w0 w1"}, {{"w0"}}),
      UsageError);

  auto pooled_cfg = cfg;
  pooled_cfg.max_pool_words = 2;
  const auto pooled =
      model::init_params(pooled_cfg, test_embeddings(5, 4, cfg.seed));
  CHECK_THROWS_AS(
      explain::extract_attention(pooled, user, {"w0 w1"}, {{"w0", "w1"}}),
      UsageError);

  auto feats_cfg = cfg;
  feats_cfg.use_text = false;
  feats_cfg.use_features = true;
  const auto feats_only =
      model::init_params(feats_cfg, test_embeddings(5, 4, cfg.seed));
  CHECK_THROWS_AS(
      explain::extract_attention(feats_only, user, {"w0 w1"}, {{"w0", "w1"}}),
      UsageError);
}

TEST_CASE("html rendering is complete, escaped, and deterministic") {
  const auto cfg = text_config();
  const auto params = model::init_params(cfg, test_embeddings(5, 4, cfg.seed));
  const auto user = text_user("u<5>&", 1, {{0, 1, 2}, {3, 4}});
  const std::vector<std::string> texts = {"x<y&z \"quoted\" 'q' plain",
                                          "hello world"};
  const std::vector<std::vector<std::string>> tokens = {
      {"x<y&z", "\"quoted\"", "'q'"}, {"hello", "world"}};

  const auto report = explain::extract_attention(params, user, texts, tokens);
  const auto html = explain::render_html(report);

  // every token renders exactly once
  CHECK(count_occurrences(html, "class=\"tok\"") == 5);
  CHECK(count_occurrences(html, "x&lt;y&amp;z") == 1);
  CHECK(count_occurrences(html, "&quot;quoted&quot;") == 1);
  CHECK(count_occurrences(html, "&#39;q&#39;") == 1);
  CHECK(count_occurrences(html, ">hello</span>") == 1);
  CHECK(count_occurrences(html, ">world</span>") == 1);
  // nothing slips through unescaped, and the page pulls nothing remote
  CHECK(html.find("x<y") == std::string::npos);
  CHECK(html.find("u<5>") == std::string::npos);
  CHECK(html.find("http") == std::string::npos);
  CHECK(html.find("src=") == std::string::npos);
  CHECK(html.find("href=") == std::string::npos);
  CHECK(html.find("prediction 0.") != std::string::npos);

  // pure function of the report: re-render and re-extract agree bytewise
  CHECK(explain::render_html(report) == html);
  const auto again = explain::extract_attention(params, user, texts, tokens);
  CHECK(explain::render_html(again) == html);

  const auto path = temp_file("mdhan_attn.html");
  explain::write_attention_html(path.string(), report);
  CHECK(slurp(path) == html);
  std::filesystem::remove(path);
}

TEST_CASE("attention json carries the ranked weights") {
  const auto cfg = text_config();
  const auto params = model::init_params(cfg, test_embeddings(5, 4, cfg.seed));
  const auto user = text_user("u6", 0, {{0, 1}, {2}});
  const auto [texts, tokens] = align_strings(user.tweets);
  const auto report = explain::extract_attention(params, user, texts, tokens);

  const auto j = nlohmann::json::parse(explain::to_json(report));
  CHECK(j.at("user_id").get<std::string>() == "u6");
  CHECK(j.at("prediction").get<double>() == report.prediction);
  REQUIRE(j.at("tweets").size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& jt = j.at("tweets").at(i);
    const auto& rt = report.tweets[i];
    CHECK(jt.at("weight").get<double>() == rt.weight);
    CHECK(jt.at("position").get<int>() == rt.position);
    CHECK(jt.at("text").get<std::string>() == rt.text);
    REQUIRE(jt.at("tokens").size() == rt.tokens.size());
    for (std::size_t w = 0; w < rt.tokens.size(); ++w) {
      CHECK(jt.at("tokens").at(w).at("token").get<std::string>() ==
            rt.tokens[w].token);
      CHECK(jt.at("tokens").at(w).at("weight").get<double>() ==
            rt.tokens[w].weight);
    }
  }

  const auto path = temp_file("mdhan_attn.json");
  explain::write_attention_json(path.string(), report);
  CHECK(nlohmann::json::parse(slurp(path)) == j);
  std::filesystem::remove(path);
}

TEST_CASE("trained attention concentrates on the signal tweets") {
  // tweet 2 of 3 carries the only class-dependent token; tweets 1 and 3 are
  // the same noise for everyone
  const int noise = 0, pos_tok = 1, neg_tok = 2;
  std::vector<model::TrainUser> users;
  for (int i = 0; i < 12; ++i) {
    const int label = i % 2;
    const int tok = label == 1 ? pos_tok : neg_tok;
    users.push_back(text_user("u" + std::to_string(i), label,
                              {{noise}, {tok}, {noise}}));
  }

  model::ModelConfig cfg = text_config();
  cfg.hidden = 4;
  cfg.dropout = 0.2;
  cfg.batch = 4;
  cfg.lr = 0.05;
  cfg.epochs = 25;
  cfg.seed = 3;
  const auto trained = model::train(users, cfg, test_embeddings(3, 4, 17));

  double signal_sum = 0.0, noise_sum = 0.0;
  for (const auto& user : users) {
    const auto enc = model::encode_user(trained.params, user);
    signal_sum += enc.tweet_attn[1];
    noise_sum += 0.5 * (enc.tweet_attn[0] + enc.tweet_attn[2]);
  }
  CHECK(signal_sum / users.size() > noise_sum / users.size());
}

TEST_CASE("symptom wordclouds pool matching tweets") {
  const auto lex_path = temp_file("mdhan_symptoms.txt");
  {
    std::ofstream out(lex_path);
    out << "[sleep]\ninsomnia\ncannot sleep\n"
        << "[mood]\nsad\n"
        << "[appetite]\nhungry\n";
  }
  const auto symptoms = lex::SymptomLexicon::load(lex_path.string());
  const corpus::StopwordSet stopwords = {"i", "the", "a"};

  corpus::UserRecord user;
  user.user_id = "w1";
  user.tweets.push_back({"insomnia ruins everything insomnia", 0, false});
  user.tweets.push_back({"i feel sad tonight", 1, false});
  user.tweets.push_back({"cannot sleep again cannot sleep", 2, false});
  user.tweets.push_back({"the weather is nice", 3, false});

  const auto data = explain::symptom_wordclouds({user}, symptoms, stopwords, 10);
  REQUIRE(data.categories.size() == 3);

  // categories rank by total keyword mentions: sleep 4, mood 1, appetite 0
  CHECK(data.categories[0].category == "sleep");
  CHECK(data.categories[0].mentions == 4);
  CHECK(data.categories[1].category == "mood");
  CHECK(data.categories[1].mentions == 1);
  CHECK(data.categories[2].category == "appetite");
  CHECK(data.categories[2].mentions == 0);
  CHECK(data.categories[2].tokens.empty());  // no matching tweet, empty cloud

  // brute-force recount over the two sleep tweets: cannot 2, insomnia 2,
  // sleep 2, again 1, everything 1, ruins 1 — ties alphabetical
  const auto& sleep = data.categories[0].tokens;
  REQUIRE(sleep.size() == 6);
  CHECK(sleep[0].token == "cannot");
  CHECK(sleep[0].count == 2);
  CHECK(sleep[1].token == "insomnia");
  CHECK(sleep[1].count == 2);
  CHECK(sleep[2].token == "sleep");
  CHECK(sleep[2].count == 2);
  CHECK(sleep[3].token == "again");
  CHECK(sleep[3].count == 1);
  CHECK(sleep[4].token == "everything");
  CHECK(sleep[4].count == 1);
  CHECK(sleep[5].token == "ruins");
  CHECK(sleep[5].count == 1);
  for (std::size_t i = 1; i < sleep.size(); ++i)
    CHECK(sleep[i - 1].count >= sleep[i].count);  // non-increasing

  // the stopword "i" was inside the matching mood tweet but never surfaces
  const auto& mood = data.categories[1].tokens;
  REQUIRE(mood.size() == 3);
  for (const auto& t : mood) CHECK(t.token != "i");
  CHECK(mood[0].token == "feel");
  CHECK(mood[1].token == "sad");
  CHECK(mood[2].token == "tonight");

  // top_n=1 keeps only the modal token per category
  const auto top1 = explain::symptom_wordclouds({user}, symptoms, stopwords, 1);
  REQUIRE(top1.categories[0].tokens.size() == 1);
  CHECK(top1.categories[0].tokens[0].token == "cannot");

  const auto none = explain::symptom_wordclouds({user}, symptoms, stopwords, 0);
  for (const auto& c : none.categories) CHECK(c.tokens.empty());
  CHECK(none.categories[0].mentions == 4);  // ranking signal survives

  CHECK_THROWS_AS(explain::symptom_wordclouds({user}, symptoms, stopwords, -1),
                  UsageError);
  std::filesystem::remove(lex_path);
}

TEST_CASE("wordcloud counts match an independent recount") {
  const auto lex_path = temp_file("mdhan_symptoms2.txt");
  {
    std::ofstream out(lex_path);
    out << "[alpha]\nstorm\n[beta]\nquiet\n";
  }
  const auto symptoms = lex::SymptomLexicon::load(lex_path.string());
  const corpus::StopwordSet stopwords = {"and", "of"};

  // randomized corpus; the oracle below recounts from scratch
  auto rng = make_engine(99, "cloud-fuzz");
  const std::vector<std::string> words = {"storm",  "quiet", "wind",
                                          "rain",   "and",   "of",
                                          "louder", "calm"};
  std::vector<corpus::UserRecord> users(3);
  for (std::size_t u = 0; u < users.size(); ++u) {
    users[u].user_id = "f" + std::to_string(u);
    for (int t = 0; t < 6; ++t) {
      std::string text;
      const int len = 3 + static_cast<int>(uniform_below(rng, 5));
      for (int w = 0; w < len; ++w) {
        if (w) text += ' ';
        text += words[uniform_below(rng, words.size())];
      }
      users[u].tweets.push_back({text, t, false});
    }
  }

  const auto data =
      explain::symptom_wordclouds(users, symptoms, stopwords, 1000);

  // independent oracle: scan every tweet for the keyword, recount tokens
  auto recount = [&](const std::string& keyword) {
    std::map<std::string, int> counts;
    int mentions = 0;
    for (const auto& user : users)
      for (const auto& tweet : user.tweets) {
        const auto raw = corpus::raw_tokens(tweet.text);
        const int hits =
            static_cast<int>(std::count(raw.begin(), raw.end(), keyword));
        if (hits == 0) continue;
        mentions += hits;
        for (const auto& tok : raw)
          if (!stopwords.count(tok)) ++counts[tok];
      }
    return std::pair(mentions, counts);
  };

  for (const auto& cloud : data.categories) {
    const auto keyword = cloud.category == "alpha" ? "storm" : "quiet";
    const auto [mentions, counts] = recount(keyword);
    CHECK(cloud.mentions == mentions);
    REQUIRE(cloud.tokens.size() == counts.size());
    for (const auto& t : cloud.tokens) {
      REQUIRE(counts.count(t.token) == 1);
      CHECK(t.count == counts.at(t.token));
      CHECK(t.count >= 1);
    }
  }
  std::filesystem::remove(lex_path);
}

TEST_CASE("wordcloud csv lists categories in rank order") {
  explain::WordCloudData data;
  data.categories.push_back({"sleep", 4, {{"cannot", 2}, {"insomnia", 2}}});
  data.categories.push_back({"mood", 1, {{"sad", 1}}});
  data.categories.push_back({"appetite", 0, {}});

  const auto path = temp_file("mdhan_cloud.csv");
  explain::write_wordcloud_csv(path.string(), data);
  const auto text = slurp(path);
  CHECK(text ==
        "category,token,count\n"
        "sleep,cannot,2\n"
        "sleep,insomnia,2\n"
        "mood,sad,1\n");

  explain::write_wordcloud_csv(path.string(), data);
  CHECK(slurp(path) == text);  // byte-identical on rewrite
  std::filesystem::remove(path);
}
