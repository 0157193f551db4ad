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

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <doctest.h>

#include "mdhan/errors.hpp"
#include "mdhan/pipeline.hpp"

using namespace mdhan;

namespace {

const pipeline::Assets& shared_assets() {
  static const pipeline::Assets assets = pipeline::load_assets(MDHAN_ASSET_DIR);
  return assets;
}

pipeline::PrepareConfig small_config() {
  pipeline::PrepareConfig cfg;
  cfg.model.embed_dim = 5;
  cfg.model.hidden = 3;
  cfg.model.n_max = 6;
  cfg.model.l_max = 6;
  cfg.model.mlp_hidden = 4;
  cfg.model.batch = 2;
  cfg.model.epochs = 2;
  cfg.model.seed = 17;
  cfg.lda.iterations = 30;
  cfg.lda.fold_in_sweeps = 10;
  cfg.lda.seed = 17;
  cfg.split.train_fraction = 0.75;
  cfg.split.seed = 4;
  return cfg;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("assets load from the shipped directory") {
  const auto& assets = shared_assets();
  CHECK(assets.stopwords.size() > 100);
  CHECK(assets.emoji.size() > 0);
  CHECK(assets.vad.size() == 1030);
  CHECK(assets.symptoms.category_count() == 9);
  CHECK(assets.antidepressants.size() > 0);

  CHECK_THROWS_AS(pipeline::load_assets("/nonexistent-asset-dir"), IoError);
}

TEST_CASE("user documents concatenate truncated preprocessed timelines") {
  corpus::Corpus c;
  corpus::UserRecord u;
  u.user_id = "d1";
  u.tweets.push_back({"The rain keeps falling", 0, false});
  u.tweets.push_back({"sunny BRIGHT morning", 1, false});
  u.tweets.push_back({"this tweet is dropped by truncation", 2, false});
  c.users.push_back(u);

  const corpus::StopwordSet stop = {"the", "is", "by"};
  const auto docs = pipeline::user_documents(c, stop, /*l_max=*/2, /*n_max=*/2);
  REQUIRE(docs.size() == 1);
  // tweet 3 truncated away; n_max keeps two tokens per tweet after stopwords
  CHECK(docs[0] ==
        std::vector<std::string>{"rain", "keeps", "sunny", "bright"});
}

TEST_CASE("prepare produces aligned model-ready splits") {
  const auto raw = corpus::synth_corpus(16, 1.0, 3);
  const auto cfg = small_config();
  const auto prep = pipeline::prepare(raw, cfg, shared_assets());

  CHECK(prep.train.size() + prep.test.size() == raw.users.size());
  CHECK(prep.train.size() == prep.train_tokens.size());
  CHECK(prep.test.size() == prep.test_tokens.size());
  CHECK(!prep.train.empty());
  CHECK(!prep.test.empty());

  std::set<std::string> ids;
  for (const auto* side : {&prep.train, &prep.test})
    for (const auto& user : *side) ids.insert(user.user_id);
  CHECK(ids.size() == raw.users.size());  // a user lands on exactly one side

  CHECK(prep.lda.config().topics == features::ModalityLayout::kTopicLen);
  CHECK(prep.embeddings.dimension() ==
        static_cast<std::size_t>(cfg.model.embed_dim));
  CHECK(prep.norm.mean.size() == features::ModalityLayout::kTotal);

  for (std::size_t i = 0; i < prep.train.size(); ++i) {
    const auto& user = prep.train[i];
    const auto& strings = prep.train_tokens[i];
    CHECK(user.tweets.size() <= static_cast<std::size_t>(cfg.model.l_max));
    REQUIRE(user.tweets.size() == strings.tokens.size());
    REQUIRE(user.tweets.size() == strings.texts.size());
    CHECK(user.feats.size() == features::ModalityLayout::kTotal);
    CHECK(user.feats.allFinite());
    for (std::size_t t = 0; t < user.tweets.size(); ++t) {
      REQUIRE(user.tweets[t].size() == strings.tokens[t].size());
      CHECK(user.tweets[t].size() <=
            static_cast<std::size_t>(cfg.model.n_max));
      for (std::size_t w = 0; w < user.tweets[t].size(); ++w) {
        // ids point at the string's own embedding row; train-side tokens
        // are in-vocabulary by construction
        CHECK(user.tweets[t][w] ==
              prep.embeddings.index_of(strings.tokens[t][w]));
        CHECK(user.tweets[t][w] != prep.embeddings.unk_index());
      }
    }
  }

  // normalization was fitted on the train side: per-dimension train means
  // vanish (masked-to-zero constant dims contribute zero as well)
  Eigen::VectorXd mean =
      Eigen::VectorXd::Zero(features::ModalityLayout::kTotal);
  for (const auto& user : prep.train) mean += user.feats;
  mean /= static_cast<double>(prep.train.size());
  CHECK(mean.cwiseAbs().maxCoeff() < 1e-9);

  // byte-level determinism of the whole preparation
  const auto again = pipeline::prepare(raw, cfg, shared_assets());
  REQUIRE(again.train.size() == prep.train.size());
  for (std::size_t i = 0; i < prep.train.size(); ++i) {
    CHECK(again.train[i].user_id == prep.train[i].user_id);
    CHECK(again.train[i].tweets == prep.train[i].tweets);
    CHECK(again.train[i].feats == prep.train[i].feats);
  }
  CHECK(again.embeddings.matrix() == prep.embeddings.matrix());
}

TEST_CASE("prepare validates configuration and embedding files") {
  const auto raw = corpus::synth_corpus(8, 0.5, 1);

  auto bad_topics = small_config();
  bad_topics.lda.topics = 3;
  CHECK_THROWS_AS(pipeline::prepare(raw, bad_topics, shared_assets()),
                  UsageError);

  auto bad_model = small_config();
  bad_model.model.hidden = 0;
  CHECK_THROWS_AS(pipeline::prepare(raw, bad_model, shared_assets()),
                  UsageError);

  // an embedding file of the wrong width is rejected up front
  const auto emb_path =
      std::filesystem::temp_directory_path() / "mdhan_small_emb.txt";
  {
    std::ofstream out(emb_path);
    out << "coffee 0.1 0.2\nmorning 0.3 0.4\n";
  }
  auto narrow = small_config();
  narrow.embeddings_path = emb_path.string();
  CHECK_THROWS_AS(pipeline::prepare(raw, narrow, shared_assets()), UsageError);

  // matching width loads and becomes the vocabulary
  auto file_cfg = small_config();
  file_cfg.model.embed_dim = 2;
  file_cfg.embeddings_path = emb_path.string();
  const auto prep = pipeline::prepare(raw, file_cfg, shared_assets());
  CHECK(prep.embeddings.size() == 2);
  CHECK(prep.embeddings.contains("coffee"));
  std::filesystem::remove(emb_path);
}

TEST_CASE("encode_record reproduces the training-side encoding") {
  const auto raw = corpus::synth_corpus(12, 1.0, 9);
  const auto cfg = small_config();
  const auto prep = pipeline::prepare(raw, cfg, shared_assets());

  for (std::size_t i = 0; i < prep.train.size(); ++i) {
    const auto& expected = prep.train[i];
    const auto rec =
        std::find_if(raw.users.begin(), raw.users.end(),
                     [&](const corpus::UserRecord& r) {
                       return r.user_id == expected.user_id;
                     });
    REQUIRE(rec != raw.users.end());
    const auto enc = pipeline::encode_record(
        *rec, cfg.model, shared_assets(), prep.embeddings, prep.lda, prep.norm);
    CHECK(enc.user.tweets == expected.tweets);
    CHECK(enc.user.feats == expected.feats);  // bitwise: same code path
    CHECK(enc.user.label == expected.label);
    CHECK(enc.tokens.tokens == prep.train_tokens[i].tokens);
    CHECK(enc.tokens.texts == prep.train_tokens[i].texts);
  }
}

TEST_CASE("bundles round-trip through disk") {
  const auto raw = corpus::synth_corpus(12, 0.8, 5);
  const auto cfg = small_config();
  auto prep = pipeline::prepare(raw, cfg, shared_assets());

  pipeline::Bundle bundle;
  bundle.params = model::init_params(cfg.model, prep.embeddings.matrix());
  bundle.table = prep.embeddings;
  bundle.lda = prep.lda;
  bundle.norm = prep.norm;

  const auto dir = temp_dir("mdhan_bundle");
  pipeline::save_bundle(dir.string(), bundle);
  const auto loaded = pipeline::load_bundle(dir.string());

  CHECK(model::config_fingerprint(loaded.params.config) ==
        model::config_fingerprint(cfg.model));
  REQUIRE(loaded.params.tensors.size() == bundle.params.tensors.size());
  for (const auto& [name, tensor] : bundle.params.tensors) {
    REQUIRE(loaded.params.tensors.count(name) == 1);
    CHECK(loaded.params.tensors.at(name) == tensor);  // bitwise
  }
  CHECK(loaded.table.tokens() == bundle.table.tokens());
  CHECK(loaded.table.matrix() == bundle.table.matrix());
  CHECK(loaded.params.embeddings == bundle.params.embeddings);
  CHECK(loaded.lda.vocab() == bundle.lda.vocab());
  CHECK(loaded.lda.phi() == bundle.lda.phi());
  CHECK(loaded.norm.mean == bundle.norm.mean);
  CHECK(loaded.norm.std_dev == bundle.norm.std_dev);

  // saving again writes byte-identical artifacts
  const auto first = std::map<std::string, std::string>{
      {"bundle.json", slurp(dir / "bundle.json")},
      {"checkpoint.bin", slurp(dir / "checkpoint.bin")},
      {"embeddings.txt", slurp(dir / "embeddings.txt")},
      {"lda.bin", slurp(dir / "lda.bin")}};
  pipeline::save_bundle(dir.string(), bundle);
  for (const auto& [file, content] : first) CHECK(slurp(dir / file) == content);

  CHECK_THROWS_AS(pipeline::load_bundle("/nonexistent-bundle-dir"), IoError);
  {
    std::ofstream out(dir / "bundle.json");
    out << "{not json";
  }
  CHECK_THROWS_AS(pipeline::load_bundle(dir.string()), DataError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("config json round-trips every field") {
  model::ModelConfig cfg;
  cfg.embed_dim = 7;
  cfg.hidden = 5;
  cfg.n_max = 9;
  cfg.l_max = 11;
  cfg.mlp_hidden = 13;
  cfg.dropout = 0.35;
  cfg.batch = 3;
  cfg.lr = 0.0025;
  cfg.epochs = 21;
  cfg.seed = 0xDEADBEEFCAFEF00DULL;
  cfg.max_pool_words = 2;
  cfg.use_text = true;
  cfg.use_features = false;
  cfg.mask.emotion = false;

  const auto back =
      pipeline::model_config_from_json(pipeline::model_config_json(cfg));
  CHECK(model::config_fingerprint(back) == model::config_fingerprint(cfg));
  CHECK(back.dropout == cfg.dropout);
  CHECK(back.lr == cfg.lr);
  CHECK(back.epochs == cfg.epochs);
  CHECK(back.seed == cfg.seed);
  CHECK(back.mask.emotion == false);
  CHECK(back.mask.social == true);

  CHECK_THROWS_AS(pipeline::model_config_from_json("{oops"), DataError);
}

TEST_CASE("model gradients verify on a prepared batch") {
  const auto raw = corpus::synth_corpus(4, 1.0, 2);
  auto cfg = small_config();
  cfg.split.train_fraction = 0.5;
  const auto prep = pipeline::prepare(raw, cfg, shared_assets());
  REQUIRE(prep.train.size() >= 2);

  const std::vector<model::TrainUser> batch = {prep.train[0], prep.train[1]};
  ad::GradCheckOptions opts;
  opts.samples_per_tensor = 2;
  opts.seed = 11;
  const auto report = pipeline::model_grad_check(
      batch, cfg.model, prep.embeddings.matrix(), opts);
  CHECK(report.deterministic);
  CHECK(report.max_rel_err < 1e-4);
  CHECK(report.coords_checked > 0);

  CHECK_THROWS_AS(pipeline::model_grad_check({}, cfg.model,
                                             prep.embeddings.matrix(), opts),
                  UsageError);
}

TEST_CASE("sweep provider truncates everything it hands out") {
  const auto raw = corpus::synth_corpus(12, 1.0, 21);  // 8-12 tweets per user
  const auto cfg = small_config();
  const auto provider =
      pipeline::sweep_provider(raw, cfg, shared_assets());

  const auto short_data = provider(2);
  CHECK(!short_data.train.empty());
  for (const auto* side : {&short_data.train, &short_data.test})
    for (const auto& user : *side) CHECK(user.tweets.size() <= 2);

  const auto long_data = provider(6);
  bool saw_longer = false;
  for (const auto& user : long_data.train)
    if (user.tweets.size() > 2) saw_longer = true;
  CHECK(saw_longer);
  // longer timelines expose at least as much vocabulary
  CHECK(long_data.embeddings.rows() >= short_data.embeddings.rows());

  // the provider is a pure function of the truncation length
  const auto again = provider(2);
  REQUIRE(again.train.size() == short_data.train.size());
  for (std::size_t i = 0; i < again.train.size(); ++i) {
    CHECK(again.train[i].tweets == short_data.train[i].tweets);
    CHECK(again.train[i].feats == short_data.train[i].feats);
  }
}
