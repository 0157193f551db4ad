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

#include "mdhan/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>
#include <utility>

#include <nlohmann/json.hpp>

#include "mdhan/errors.hpp"

namespace mdhan::pipeline {

namespace {

corpus::UserRecord truncate_timeline(const corpus::UserRecord& rec,
                                     int l_max) {
  corpus::UserRecord out = rec;
  if (static_cast<int>(out.tweets.size()) > l_max) out.tweets.resize(l_max);
  return out;
}

// tokenized tweets of the already-truncated record
std::vector<std::vector<std::string>> tweet_tokens(
    const corpus::UserRecord& rec, const corpus::StopwordSet& stopwords,
    int n_max) {
  std::vector<std::vector<std::string>> out;
  out.reserve(rec.tweets.size());
  for (const auto& tweet : rec.tweets)
    out.push_back(
        corpus::preprocess_tweet(tweet.text, stopwords,
                                 static_cast<std::size_t>(n_max))
            .tokens);
  return out;
}

features::FeatureVector raw_features(const corpus::UserRecord& truncated,
                                     const Assets& assets,
                                     const topics::LdaModel& lda) {
  return features::assemble(truncated, assets.emoji, assets.vad, lda,
                            assets.stopwords, assets.symptoms,
                            assets.antidepressants);
}

// id-encodes one truncated record; feats left empty for the caller
std::pair<model::TrainUser, UserTokens> encode_text(
    const corpus::UserRecord& truncated, const model::ModelConfig& cfg,
    const corpus::StopwordSet& stopwords, const lex::EmbeddingTable& table) {
  model::TrainUser user;
  user.user_id = truncated.user_id;
  user.label = truncated.label;
  UserTokens strings;
  for (const auto& tweet : truncated.tweets) {
    const auto toks =
        corpus::preprocess_tweet(tweet.text, stopwords,
                                 static_cast<std::size_t>(cfg.n_max))
            .tokens;
    std::vector<int> ids;
    ids.reserve(toks.size());
    for (const auto& tok : toks) ids.push_back(table.index_of(tok));
    user.tweets.push_back(std::move(ids));
    strings.texts.push_back(tweet.text);
    strings.tokens.push_back(toks);
  }
  return {std::move(user), std::move(strings)};
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

nlohmann::json mask_json(const features::ModalityMask& mask) {
  return {{"social", mask.social},
          {"emotion", mask.emotion},
          {"topic", mask.topic},
          {"domain", mask.domain}};
}

Eigen::VectorXd json_vector(const nlohmann::json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = j.at(i).get<double>();
  return v;
}

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

}  // namespace

Assets load_assets(const std::string& dir) {
  Assets assets;
  assets.stopwords = corpus::load_stopwords(dir + "/stopwords.txt");
  assets.emoji = lex::EmojiLexicon::load(dir + "/emoji_sentiment.tsv");
  assets.vad = lex::VadLexicon::load(dir + "/vad_norms.csv");
  assets.symptoms = lex::SymptomLexicon::load(dir + "/symptom_seeds.txt");
  assets.antidepressants =
      lex::AntidepressantLexicon::load(dir + "/antidepressants.txt");
  return assets;
}

std::vector<std::vector<std::string>> user_documents(
    const corpus::Corpus& corpus, const corpus::StopwordSet& stopwords,
    int l_max, int n_max) {
  std::vector<std::vector<std::string>> docs;
  docs.reserve(corpus.users.size());
  for (const auto& rec : corpus.users) {
    std::vector<std::string> doc;
    const auto truncated = truncate_timeline(rec, l_max);
    for (auto& toks : tweet_tokens(truncated, stopwords, n_max))
      doc.insert(doc.end(), std::make_move_iterator(toks.begin()),
                 std::make_move_iterator(toks.end()));
    docs.push_back(std::move(doc));
  }
  return docs;
}

Prepared prepare(const corpus::Corpus& all, const PrepareConfig& cfg,
                 const Assets& assets) {
  model::check_config(cfg.model);
  if (cfg.lda.topics != features::ModalityLayout::kTopicLen)
    throw UsageError("topic count must be " +
                     std::to_string(features::ModalityLayout::kTopicLen) +
                     " to fill the topic feature slice");

  const auto [train_c, test_c] = corpus::split(all, cfg.split);

  Prepared out;
  out.lda = topics::fit_lda(
      user_documents(train_c, assets.stopwords, cfg.model.l_max,
                     cfg.model.n_max),
      cfg.lda);

  if (cfg.embeddings_path.empty()) {
    // vocabulary in first-occurrence order over the train timelines
    std::vector<std::string> vocab;
    std::unordered_set<std::string> seen;
    for (const auto& rec : train_c.users) {
      const auto truncated = truncate_timeline(rec, cfg.model.l_max);
      for (const auto& toks :
           tweet_tokens(truncated, assets.stopwords, cfg.model.n_max))
        for (const auto& tok : toks)
          if (seen.insert(tok).second) vocab.push_back(tok);
    }
    out.embeddings = lex::EmbeddingTable::random(
        vocab, static_cast<std::size_t>(cfg.model.embed_dim), cfg.model.seed);
  } else {
    out.embeddings = lex::EmbeddingTable::load(cfg.embeddings_path);
    if (out.embeddings.dimension() !=
        static_cast<std::size_t>(cfg.model.embed_dim))
      throw UsageError(
          "embedding file dimension " +
          std::to_string(out.embeddings.dimension()) +
          " does not match the configured dimension " +
          std::to_string(cfg.model.embed_dim));
  }

  // encode both splits; normalization statistics come from train only
  std::vector<features::FeatureVector> train_raw;
  for (const auto* side : {&train_c, &test_c}) {
    const bool is_train = side == &train_c;
    for (const auto& rec : side->users) {
      const auto truncated = truncate_timeline(rec, cfg.model.l_max);
      auto [user, strings] =
          encode_text(truncated, cfg.model, assets.stopwords, out.embeddings);
      user.feats = raw_features(truncated, assets, out.lda).values;
      if (is_train) {
        train_raw.push_back({user.feats});
        out.train.push_back(std::move(user));
        out.train_tokens.push_back(std::move(strings));
      } else {
        out.test.push_back(std::move(user));
        out.test_tokens.push_back(std::move(strings));
      }
    }
  }
  out.norm = features::fit_norm(train_raw);
  for (auto* side : {&out.train, &out.test})
    for (auto& user : *side)
      user.feats = features::apply_norm({user.feats}, out.norm).values;
  return out;
}

EncodedUser encode_record(const corpus::UserRecord& rec,
                          const model::ModelConfig& cfg, const Assets& assets,
                          const lex::EmbeddingTable& table,
                          const topics::LdaModel& lda,
                          const features::NormStats& norm) {
  const auto truncated = truncate_timeline(rec, cfg.l_max);
  EncodedUser out;
  auto [user, strings] = encode_text(truncated, cfg, assets.stopwords, table);
  user.feats =
      features::apply_norm(raw_features(truncated, assets, lda), norm).values;
  out.user = std::move(user);
  out.tokens = std::move(strings);
  return out;
}

void save_bundle(const std::string& dir, const Bundle& bundle) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir);

  {
    nlohmann::json j{
        {"model", nlohmann::json::parse(
                      model_config_json(bundle.params.config))},
        {"norm",
         {{"mean", vector_json(bundle.norm.mean)},
          {"std_dev", vector_json(bundle.norm.std_dev)}}}};
    open_out(dir + "/bundle.json") << j.dump(2) << '\n';
  }

  model::save_model(bundle.params, dir + "/checkpoint.bin");
  bundle.lda.save(dir + "/lda.bin");

  // "token v1 .. vd" rows; %.17g keeps every double bit-exact on reload
  auto out = open_out(dir + "/embeddings.txt");
  const auto& matrix = bundle.table.matrix();
  char buf[32];
  for (std::size_t r = 0; r < bundle.table.size(); ++r) {
    out << bundle.table.tokens()[r];
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g",
                    matrix(static_cast<Eigen::Index>(r), c));
      out << ' ' << buf;
    }
    out << '\n';
  }
}

Bundle load_bundle(const std::string& dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(dir + "/bundle.json"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed bundle.json: " + std::string(e.what()));
  }

  Bundle bundle;
  const auto& norm = j.at("norm");
  bundle.norm.mean = json_vector(norm.at("mean"));
  bundle.norm.std_dev = json_vector(norm.at("std_dev"));

  const model::ModelConfig cfg =
      model_config_from_json(j.at("model").dump());
  bundle.table = lex::EmbeddingTable::load(dir + "/embeddings.txt");
  bundle.params =
      model::load_model(dir + "/checkpoint.bin", cfg, bundle.table.matrix());
  bundle.lda = topics::LdaModel::load(dir + "/lda.bin");
  return bundle;
}

std::string model_config_json(const model::ModelConfig& cfg) {
  nlohmann::json j{{"embed_dim", cfg.embed_dim},
                   {"hidden", cfg.hidden},
                   {"n_max", cfg.n_max},
                   {"l_max", cfg.l_max},
                   {"mlp_hidden", cfg.mlp_hidden},
                   {"dropout", cfg.dropout},
                   {"batch", cfg.batch},
                   {"lr", cfg.lr},
                   {"epochs", cfg.epochs},
                   {"seed", cfg.seed},
                   {"max_pool_words", cfg.max_pool_words},
                   {"use_text", cfg.use_text},
                   {"use_features", cfg.use_features},
                   {"mask", mask_json(cfg.mask)}};
  return j.dump(2);
}

model::ModelConfig model_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed model config: " + std::string(e.what()));
  }
  model::ModelConfig cfg;  // absent keys keep their defaults
  try {
    cfg.embed_dim = j.value("embed_dim", cfg.embed_dim);
    cfg.hidden = j.value("hidden", cfg.hidden);
    cfg.n_max = j.value("n_max", cfg.n_max);
    cfg.l_max = j.value("l_max", cfg.l_max);
    cfg.mlp_hidden = j.value("mlp_hidden", cfg.mlp_hidden);
    cfg.dropout = j.value("dropout", cfg.dropout);
    cfg.batch = j.value("batch", cfg.batch);
    cfg.lr = j.value("lr", cfg.lr);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.max_pool_words = j.value("max_pool_words", cfg.max_pool_words);
    cfg.use_text = j.value("use_text", cfg.use_text);
    cfg.use_features = j.value("use_features", cfg.use_features);
    if (j.count("mask")) {
      const auto& m = j.at("mask");
      cfg.mask.social = m.value("social", true);
      cfg.mask.emotion = m.value("emotion", true);
      cfg.mask.topic = m.value("topic", true);
      cfg.mask.domain = m.value("domain", true);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed model config: " + std::string(e.what()));
  }
  return cfg;
}

ad::GradCheckReport model_grad_check(
    const std::vector<model::TrainUser>& users, model::ModelConfig cfg,
    const Eigen::MatrixXd& embeddings, const ad::GradCheckOptions& opts) {
  if (users.empty()) throw UsageError("gradient check needs at least one user");
  cfg.dropout = 0.0;  // finite differences need a pure loss
  model::check_config(cfg);
  const auto params = model::init_params(cfg, embeddings);

  auto batch_loss = [&](ad::Tape& tape,
                        const std::map<std::string, ad::NodeId>& nodes) {
    std::vector<ad::NodeId> losses;
    for (const auto& user : users) {
      const auto graph =
          model::build_user_graph(tape, nodes, cfg, embeddings, user, false, 0);
      losses.push_back(tape.bce_loss(graph.yhat, user.label));
    }
    return tape.mean(tape.vcat(losses));
  };

  auto loss_of = [&](const ad::ParamMap& tensors) {
    ad::Tape tape;
    std::map<std::string, ad::NodeId> nodes;
    for (const auto& [name, value] : tensors)
      nodes[name] = tape.input(value, false);
    return tape.value(batch_loss(tape, nodes))(0, 0);
  };
  auto grads_of = [&](const ad::ParamMap& tensors) {
    ad::Tape tape;
    std::map<std::string, ad::NodeId> nodes;
    for (const auto& [name, value] : tensors)
      nodes[name] = tape.input(value, true);
    tape.backward(batch_loss(tape, nodes));
    ad::ParamMap grads;
    for (const auto& [name, id] : nodes) grads[name] = tape.grad(id);
    return grads;
  };
  return ad::grad_check(loss_of, grads_of, params.tensors, opts);
}

eval::DataProvider sweep_provider(corpus::Corpus all, PrepareConfig cfg,
                                  Assets assets) {
  return [all = std::move(all), cfg = std::move(cfg),
          assets = std::move(assets)](int max_tweets) {
    PrepareConfig point = cfg;
    point.model.l_max = max_tweets;
    Prepared p = prepare(all, point, assets);
    return eval::PreparedData{std::move(p.train), std::move(p.test),
                              p.embeddings.matrix()};
  };
}

}  // namespace mdhan::pipeline
