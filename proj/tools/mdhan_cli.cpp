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

// Command-line front end. Exit codes: 0 success; CLI11 parse errors use its
// own nonzero codes; 2 usage, 3 I/O, 4 data, 5 numeric, 6 internal. Every
// artifact-producing command echoes its resolved configuration to
// <out>/resolved_config.ini for provenance.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mdhan/corpus.hpp"
#include "mdhan/errors.hpp"
#include "mdhan/eval.hpp"
#include "mdhan/explain.hpp"
#include "mdhan/features.hpp"
#include "mdhan/lexicons.hpp"
#include "mdhan/model.hpp"
#include "mdhan/pipeline.hpp"
#include "mdhan/topics.hpp"

namespace {

using namespace mdhan;

constexpr int kUsageExit = 2;
constexpr int kIoExit = 3;
constexpr int kDataExit = 4;
constexpr int kNumericExit = 5;
constexpr int kInternalExit = 6;

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir);
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << content;
}

// resolved-config echo: every value the run actually used, file+flag merged
void echo_config(const CLI::App* cmd, const std::string& out_dir) {
  write_text(out_dir + "/resolved_config.ini",
             "# resolved configuration of `mdhan " +
                 std::string(cmd->get_name()) + "`\n" +
                 cmd->config_to_str(true, true));
}

std::string fmt4(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

std::string metrics_line(const eval::MetricsReport& r, std::size_t n) {
  return "accuracy " + fmt4(r.accuracy) + "  precision " + fmt4(r.precision) +
         "  recall " + fmt4(r.recall) + "  f1 " + fmt4(r.f1) + "  (" +
         std::to_string(n) + " users, macro-averaged)";
}

std::string safe_filename(const std::string& id) {
  std::string out = id;
  for (char& c : out)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_')
      c = '_';
  return out;
}

// ---------------------------------------------------------------------------
// shared option bundles

struct DataOptions {
  std::string corpus_path;
  std::string assets_dir = "./assets";
  pipeline::PrepareConfig prepare;
};

void add_assets_flag(CLI::App* cmd, std::string& assets_dir) {
  cmd->add_option("--assets", assets_dir,
                  "asset directory (stopwords, lexicons)")
      ->envname("MDHAN_ASSETS")
      ->capture_default_str();
}

void add_model_flags(CLI::App* cmd, model::ModelConfig& m) {
  cmd->add_option("--embed-dim", m.embed_dim, "word-embedding width")
      ->capture_default_str();
  cmd->add_option("--hidden", m.hidden, "recurrent units per direction")
      ->capture_default_str();
  cmd->add_option("--n-max", m.n_max, "max tokens per tweet")
      ->capture_default_str();
  cmd->add_option("--l-max", m.l_max, "max tweets per user")
      ->capture_default_str();
  cmd->add_option("--mlp-hidden", m.mlp_hidden, "feature-branch hidden width")
      ->capture_default_str();
  cmd->add_option("--dropout", m.dropout, "dropout rate before fusion")
      ->capture_default_str();
  cmd->add_option("--batch", m.batch, "mini-batch size")
      ->capture_default_str();
  cmd->add_option("--lr", m.lr, "learning rate")->capture_default_str();
  cmd->add_option("--epochs", m.epochs, "training epochs")
      ->capture_default_str();
  cmd->add_option("--seed", m.seed, "run seed (init, shuffling, dropout)")
      ->capture_default_str();
  cmd->add_option("--max-pool-words", m.max_pool_words,
                  "word max-pool window; 0 disables")
      ->capture_default_str();
  cmd->add_flag("--text,!--no-text", m.use_text, "hierarchical text branch")
      ->capture_default_str();
  cmd->add_flag("--features,!--no-features", m.use_features,
                "modality feature branch")
      ->capture_default_str();
  cmd->add_flag("!--drop-social", m.mask.social,
                "zero the social feature slice");
  cmd->add_flag("!--drop-emotion", m.mask.emotion,
                "zero the emotion feature slice");
  cmd->add_flag("!--drop-topic", m.mask.topic, "zero the topic feature slice");
  cmd->add_flag("!--drop-domain", m.mask.domain,
                "zero the domain feature slice");
}

void add_lda_flags(CLI::App* cmd, topics::LdaConfig& lda) {
  cmd->add_option("--lda-iters", lda.iterations, "Gibbs sweeps for topic fit")
      ->capture_default_str();
  cmd->add_option("--lda-alpha", lda.alpha,
                  "document-topic prior; negative = 50/K")
      ->capture_default_str();
  cmd->add_option("--lda-beta", lda.beta, "topic-word prior")
      ->capture_default_str();
  cmd->add_option("--lda-seed", lda.seed, "topic-model seed")
      ->capture_default_str();
  cmd->add_option("--fold-in-sweeps", lda.fold_in_sweeps,
                  "Gibbs sweeps for per-user topic inference")
      ->capture_default_str();
}

void add_split_flags(CLI::App* cmd, corpus::SplitSpec& split) {
  cmd->add_option("--train-fraction", split.train_fraction,
                  "per-class train share")
      ->capture_default_str();
  cmd->add_option("--split-seed", split.seed, "split assignment seed")
      ->capture_default_str();
}

void add_data_flags(CLI::App* cmd, DataOptions& d) {
  cmd->add_option("--corpus", d.corpus_path, "corpus JSONL file")
      ->required();
  add_assets_flag(cmd, d.assets_dir);
  cmd->add_option("--embeddings", d.prepare.embeddings_path,
                  "embedding text file; omit for a deterministic synthetic "
                  "table over the train vocabulary");
  add_model_flags(cmd, d.prepare.model);
  add_lda_flags(cmd, d.prepare.lda);
  add_split_flags(cmd, d.prepare.split);
}

// ---------------------------------------------------------------------------
// command implementations

struct SynthOptions {
  corpus::SynthSpec spec;
  double signal = -1.0;  // <0: leave the per-channel values alone
  std::string out_dir;
};

void run_synth(const SynthOptions& opt, const CLI::App* cmd) {
  corpus::SynthSpec spec = opt.spec;
  if (opt.signal >= 0.0) {
    spec.text_signal = opt.signal;
    spec.hour_signal = opt.signal;
    spec.emoji_signal = opt.signal;
  }
  const auto corpus = corpus::synth_corpus(spec);
  ensure_dir(opt.out_dir);
  corpus::save_corpus(corpus, opt.out_dir + "/corpus.jsonl");
  echo_config(cmd, opt.out_dir);
  std::cout << "wrote " << corpus.users.size() << " users to " << opt.out_dir
            << "/corpus.jsonl\n";
}

struct IngestOptions {
  std::string in_path;
  std::int64_t min_posts = 10;
  std::int64_t max_followers = 5000;
  std::string out_dir;
};

void run_ingest(const IngestOptions& opt, const CLI::App* cmd) {
  const auto raw = corpus::load_corpus(opt.in_path);
  const auto kept =
      corpus::filter_users(raw, opt.min_posts, opt.max_followers);
  ensure_dir(opt.out_dir);
  corpus::save_corpus(kept, opt.out_dir + "/corpus.jsonl");
  echo_config(cmd, opt.out_dir);
  if (!kept.warning.empty()) std::cout << "warning: " << kept.warning << '\n';
  std::cout << "kept " << kept.users.size() << " of " << raw.users.size()
            << " users; wrote " << opt.out_dir << "/corpus.jsonl\n";
}

struct FeaturesOptions {
  std::string corpus_path;
  std::string assets_dir = "./assets";
  std::string lda_path;
  int l_max = 200;
  std::string out_dir;
};

void run_features(const FeaturesOptions& opt, const CLI::App* cmd) {
  const auto corpus = corpus::load_corpus(opt.corpus_path);
  const auto assets = pipeline::load_assets(opt.assets_dir);
  const auto lda = topics::LdaModel::load(opt.lda_path);

  std::vector<std::string> ids;
  std::vector<features::FeatureVector> rows;
  for (const auto& rec : corpus.users) {
    corpus::UserRecord truncated = rec;
    if (static_cast<int>(truncated.tweets.size()) > opt.l_max)
      truncated.tweets.resize(opt.l_max);
    ids.push_back(rec.user_id);
    rows.push_back(features::assemble(truncated, assets.emoji, assets.vad, lda,
                                      assets.stopwords, assets.symptoms,
                                      assets.antidepressants));
  }
  ensure_dir(opt.out_dir);
  features::write_features_csv(opt.out_dir + "/features.csv", ids, rows);
  echo_config(cmd, opt.out_dir);
  std::cout << "wrote " << rows.size() << " raw feature rows to "
            << opt.out_dir << "/features.csv\n";
}

struct LdaFitOptions {
  std::string corpus_path;
  std::string assets_dir = "./assets";
  topics::LdaConfig lda;
  int l_max = 200;
  int n_max = 30;
  std::string out_dir;
};

void run_lda_fit(const LdaFitOptions& opt, const CLI::App* cmd) {
  const auto corpus = corpus::load_corpus(opt.corpus_path);
  const auto assets = pipeline::load_assets(opt.assets_dir);
  const auto docs = pipeline::user_documents(corpus, assets.stopwords,
                                             opt.l_max, opt.n_max);
  const auto model = topics::fit_lda(docs, opt.lda);

  ensure_dir(opt.out_dir);
  model.save(opt.out_dir + "/lda.bin");
  std::ostringstream summary;
  for (int t = 0; t < opt.lda.topics; ++t) {
    summary << "topic " << t << ':';
    for (const auto& [word, prob] : topics::top_words(model, t, 10))
      summary << ' ' << word;
    summary << '\n';
  }
  write_text(opt.out_dir + "/topics.txt", summary.str());
  echo_config(cmd, opt.out_dir);
  std::cout << "fitted " << opt.lda.topics << " topics on " << docs.size()
            << " user documents; wrote " << opt.out_dir << "/lda.bin\n";
}

struct TrainOptions {
  DataOptions data;
  std::string out_dir;
};

void run_train(const TrainOptions& opt, const CLI::App* cmd) {
  const auto corpus = corpus::load_corpus(opt.data.corpus_path);
  const auto assets = pipeline::load_assets(opt.data.assets_dir);
  auto prep = pipeline::prepare(corpus, opt.data.prepare, assets);

  const auto result = model::train(prep.train, opt.data.prepare.model,
                                   prep.embeddings.matrix());
  for (std::size_t e = 0; e < result.history.size(); ++e)
    std::cout << "epoch " << (e + 1) << '/' << result.history.size()
              << "  loss " << fmt4(result.history[e].loss) << "  train-acc "
              << fmt4(result.history[e].accuracy) << '\n';

  ensure_dir(opt.out_dir);
  pipeline::Bundle bundle{result.params, std::move(prep.embeddings),
                          std::move(prep.lda), std::move(prep.norm)};
  pipeline::save_bundle(opt.out_dir + "/bundle", bundle);

  std::ostringstream history;
  history.precision(17);
  history << "epoch,loss,train_accuracy\n";
  for (std::size_t e = 0; e < result.history.size(); ++e)
    history << (e + 1) << ',' << result.history[e].loss << ','
            << result.history[e].accuracy << '\n';
  write_text(opt.out_dir + "/history.csv", history.str());

  if (!prep.test.empty()) {
    const auto report = eval::evaluate(result.params, prep.test);
    eval::write_metrics_json(opt.out_dir + "/metrics.json", report);
    std::cout << "held-out " << metrics_line(report, prep.test.size()) << '\n';
  } else {
    std::cout << "held-out split is empty; no metrics.json written\n";
  }
  echo_config(cmd, opt.out_dir);
  std::cout << "bundle saved to " << opt.out_dir << "/bundle\n";
}

struct EvalOptions {
  std::string bundle_dir;
  std::string corpus_path;
  std::string assets_dir = "./assets";
  std::string out_dir;
};

void run_eval(const EvalOptions& opt, const CLI::App* cmd) {
  const auto bundle = pipeline::load_bundle(opt.bundle_dir);
  const auto corpus = corpus::load_corpus(opt.corpus_path);
  const auto assets = pipeline::load_assets(opt.assets_dir);

  std::vector<model::TrainUser> users;
  users.reserve(corpus.users.size());
  for (const auto& rec : corpus.users)
    users.push_back(pipeline::encode_record(rec, bundle.params.config, assets,
                                            bundle.table, bundle.lda,
                                            bundle.norm)
                        .user);
  const auto report = eval::evaluate(bundle.params, users);
  ensure_dir(opt.out_dir);
  eval::write_metrics_json(opt.out_dir + "/metrics.json", report);
  echo_config(cmd, opt.out_dir);
  std::cout << metrics_line(report, users.size()) << '\n';
}

struct AblateOptions {
  DataOptions data;
  std::vector<std::string> only;
  std::string out_dir;
};

void run_ablate(const AblateOptions& opt, const CLI::App* cmd) {
  const auto corpus = corpus::load_corpus(opt.data.corpus_path);
  const auto assets = pipeline::load_assets(opt.data.assets_dir);
  const auto prep = pipeline::prepare(corpus, opt.data.prepare, assets);

  auto configs = eval::standard_ablations();
  if (!opt.only.empty()) {
    std::vector<eval::AblationConfig> chosen;
    for (const auto& name : opt.only) {
      const auto it =
          std::find_if(configs.begin(), configs.end(),
                       [&](const auto& c) { return c.name == name; });
      if (it == configs.end())
        throw UsageError("unknown ablation \"" + name + '"');
      chosen.push_back(*it);
    }
    configs = std::move(chosen);
  }

  const auto results =
      eval::run_ablations(configs, prep.train, prep.test,
                          opt.data.prepare.model, prep.embeddings.matrix());
  ensure_dir(opt.out_dir);
  eval::write_ablation_csv(opt.out_dir + "/ablations.csv", results);
  echo_config(cmd, opt.out_dir);
  for (const auto& r : results)
    std::cout << r.name << "  accuracy " << fmt4(r.report.accuracy) << "  f1 "
              << fmt4(r.report.f1) << '\n';
  std::cout << "wrote " << opt.out_dir << "/ablations.csv\n";
}

struct SweepOptions {
  DataOptions data;
  std::vector<int> lengths;
  std::string out_dir;
};

void run_sweep(const SweepOptions& opt, const CLI::App* cmd) {
  const auto corpus = corpus::load_corpus(opt.data.corpus_path);
  const auto assets = pipeline::load_assets(opt.data.assets_dir);
  const auto provider =
      pipeline::sweep_provider(corpus, opt.data.prepare, assets);
  const auto curve = eval::tweet_count_sweep(opt.lengths, provider,
                                             opt.data.prepare.model);
  ensure_dir(opt.out_dir);
  eval::write_sweep_csv(opt.out_dir + "/sweep.csv", curve);
  echo_config(cmd, opt.out_dir);
  for (const auto& point : curve)
    std::cout << "L=" << point.max_tweets << "  accuracy "
              << fmt4(point.report.accuracy) << "  f1 "
              << fmt4(point.report.f1) << '\n';
  std::cout << "wrote " << opt.out_dir << "/sweep.csv\n";
}

struct ExplainOptions {
  std::string bundle_dir;
  std::string corpus_path;
  std::string assets_dir = "./assets";
  std::vector<std::string> users;  // empty = all
  int cloud_top = 50;
  std::string out_dir;
};

void run_explain(const ExplainOptions& opt, const CLI::App* cmd) {
  const auto bundle = pipeline::load_bundle(opt.bundle_dir);
  const auto corpus = corpus::load_corpus(opt.corpus_path);
  const auto assets = pipeline::load_assets(opt.assets_dir);

  std::vector<const corpus::UserRecord*> selected;
  if (opt.users.empty()) {
    for (const auto& rec : corpus.users) selected.push_back(&rec);
  } else {
    for (const auto& id : opt.users) {
      const auto it = std::find_if(
          corpus.users.begin(), corpus.users.end(),
          [&](const corpus::UserRecord& r) { return r.user_id == id; });
      if (it == corpus.users.end())
        throw DataError("user \"" + id + "\" not present in the corpus");
      selected.push_back(&*it);
    }
  }

  ensure_dir(opt.out_dir);
  for (const auto* rec : selected) {
    const auto enc = pipeline::encode_record(*rec, bundle.params.config,
                                             assets, bundle.table, bundle.lda,
                                             bundle.norm);
    const auto report = explain::extract_attention(
        bundle.params, enc.user, enc.tokens.texts, enc.tokens.tokens);
    const auto stem = opt.out_dir + "/attention_" + safe_filename(rec->user_id);
    explain::write_attention_html(stem + ".html", report);
    explain::write_attention_json(stem + ".json", report);
  }

  const auto clouds = explain::symptom_wordclouds(
      corpus.users, assets.symptoms, assets.stopwords, opt.cloud_top);
  explain::write_wordcloud_csv(opt.out_dir + "/wordclouds.csv", clouds);
  echo_config(cmd, opt.out_dir);
  std::cout << "wrote " << selected.size()
            << " attention reports and wordclouds.csv to " << opt.out_dir
            << '\n';
}

struct GradcheckOptions {
  std::string assets_dir = "./assets";
  std::uint64_t seed = 1;
  int batch_users = 2;
  int samples = 3;
  double tolerance = 1e-4;
  std::string out_dir;  // optional
};

void run_gradcheck(const GradcheckOptions& opt, const CLI::App* cmd) {
  // a small architecture keeps the finite-difference sweep quick while still
  // passing through every layer of the full model
  pipeline::PrepareConfig pcfg;
  pcfg.model.embed_dim = 5;
  pcfg.model.hidden = 4;
  pcfg.model.n_max = 6;
  pcfg.model.l_max = 6;
  pcfg.model.mlp_hidden = 6;
  pcfg.model.seed = opt.seed;
  pcfg.lda.iterations = 30;
  pcfg.lda.fold_in_sweeps = 10;
  pcfg.lda.seed = opt.seed;
  pcfg.split.train_fraction = 0.5;
  pcfg.split.seed = opt.seed;

  const auto assets = pipeline::load_assets(opt.assets_dir);
  const auto corpus = corpus::synth_corpus(8, 1.0, opt.seed);
  const auto prep = pipeline::prepare(corpus, pcfg, assets);

  std::vector<model::TrainUser> batch(
      prep.train.begin(),
      prep.train.begin() +
          std::min<std::size_t>(prep.train.size(),
                                static_cast<std::size_t>(
                                    std::max(opt.batch_users, 1))));
  ad::GradCheckOptions gopts;
  gopts.samples_per_tensor = opt.samples;
  gopts.seed = opt.seed;
  const auto report = pipeline::model_grad_check(batch, pcfg.model,
                                                 prep.embeddings.matrix(),
                                                 gopts);

  std::cout << "max relative error " << report.max_rel_err << " over "
            << report.coords_checked << " coordinates";
  if (!report.worst_param.empty())
    std::cout << " (worst " << report.worst_param << '[' << report.worst_row
              << ',' << report.worst_col << "])";
  std::cout << '\n';

  if (!opt.out_dir.empty()) {
    ensure_dir(opt.out_dir);
    nlohmann::json j{{"max_rel_err", report.max_rel_err},
                     {"coords_checked", report.coords_checked},
                     {"deterministic", report.deterministic},
                     {"worst_param", report.worst_param},
                     {"tolerance", opt.tolerance}};
    write_text(opt.out_dir + "/gradcheck.json", j.dump(2) + "\n");
    echo_config(cmd, opt.out_dir);
  }
  if (!report.deterministic)
    throw NumericError("loss was not deterministic across evaluations");
  if (!(report.max_rel_err < opt.tolerance))
    throw NumericError("max relative error " +
                       std::to_string(report.max_rel_err) +
                       " exceeds tolerance " + std::to_string(opt.tolerance));
}

struct NbOptions {
  std::string corpus_path;
  std::string assets_dir = "./assets";
  corpus::SplitSpec split;
  int l_max = 200;
  int n_max = 30;
  std::string out_dir;
};

void run_baseline_nb(const NbOptions& opt, const CLI::App* cmd) {
  const auto corpus = corpus::load_corpus(opt.corpus_path);
  const auto assets = pipeline::load_assets(opt.assets_dir);
  const auto [train_c, test_c] = corpus::split(corpus, opt.split);

  auto docs_and_labels = [&](const corpus::Corpus& side) {
    auto docs = pipeline::user_documents(side, assets.stopwords, opt.l_max,
                                         opt.n_max);
    std::vector<int> labels;
    labels.reserve(side.users.size());
    for (const auto& rec : side.users) labels.push_back(rec.label);
    return std::pair(std::move(docs), std::move(labels));
  };
  const auto [train_docs, train_labels] = docs_and_labels(train_c);
  const auto [test_docs, test_labels] = docs_and_labels(test_c);

  const auto nb = eval::nb_train(train_docs, train_labels);
  const auto train_report = eval::nb_metrics(nb, train_docs, train_labels);
  std::cout << "train " << metrics_line(train_report, train_docs.size())
            << '\n';
  ensure_dir(opt.out_dir);
  if (!test_docs.empty()) {
    const auto test_report = eval::nb_metrics(nb, test_docs, test_labels);
    eval::write_metrics_json(opt.out_dir + "/metrics.json", test_report);
    std::cout << "held-out " << metrics_line(test_report, test_docs.size())
              << '\n';
  } else {
    std::cout << "held-out split is empty; no metrics.json written\n";
  }
  echo_config(cmd, opt.out_dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-modal hierarchical-attention depression detection"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "key-value configuration file; command-line flags override "
                 "file values");

  // synth ------------------------------------------------------------------
  SynthOptions synth;
  auto* synth_cmd =
      app.add_subcommand("synth", "generate a labeled synthetic corpus");
  synth_cmd->add_option("--users", synth.spec.n_users,
                        "user count (even; classes balanced)")
      ->capture_default_str();
  synth_cmd->add_option("--signal", synth.signal,
                        "strength in [0,1] applied to all three channels");
  synth_cmd->add_option("--text-signal", synth.spec.text_signal,
                        "depressed-vocabulary tweet probability")
      ->capture_default_str();
  synth_cmd->add_option("--hour-signal", synth.spec.hour_signal,
                        "night-posting probability for depressed users")
      ->capture_default_str();
  synth_cmd->add_option("--emoji-signal", synth.spec.emoji_signal,
                        "class-polarized emoji probability")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.spec.seed, "generator seed")
      ->capture_default_str();
  synth_cmd->add_option("--tweets-min", synth.spec.tweets_min, "min tweets")
      ->capture_default_str();
  synth_cmd->add_option("--tweets-max", synth.spec.tweets_max, "max tweets")
      ->capture_default_str();
  synth_cmd->add_option("--name", synth.spec.name, "corpus name")
      ->capture_default_str();
  synth_cmd->add_option("--out", synth.out_dir, "output directory")
      ->required();
  synth_cmd->callback([&] { run_synth(synth, synth_cmd); });

  // ingest -----------------------------------------------------------------
  IngestOptions ingest;
  auto* ingest_cmd = app.add_subcommand(
      "ingest", "load, validate, and filter a corpus JSONL file");
  ingest_cmd->add_option("--in", ingest.in_path, "raw corpus JSONL")
      ->required();
  ingest_cmd->add_option("--min-posts", ingest.min_posts,
                         "drop users with fewer tweets")
      ->capture_default_str();
  ingest_cmd->add_option("--max-followers", ingest.max_followers,
                         "drop users with more followers")
      ->capture_default_str();
  ingest_cmd->add_option("--out", ingest.out_dir, "output directory")
      ->required();
  ingest_cmd->callback([&] { run_ingest(ingest, ingest_cmd); });

  // features ---------------------------------------------------------------
  FeaturesOptions feats;
  auto* feats_cmd = app.add_subcommand(
      "features", "export raw (unnormalized) per-user feature rows");
  feats_cmd->add_option("--corpus", feats.corpus_path, "corpus JSONL file")
      ->required();
  add_assets_flag(feats_cmd, feats.assets_dir);
  feats_cmd->add_option("--lda", feats.lda_path,
                        "fitted topic model (lda-fit output)")
      ->required();
  feats_cmd->add_option("--l-max", feats.l_max, "max tweets per user")
      ->capture_default_str();
  feats_cmd->add_option("--out", feats.out_dir, "output directory")
      ->required();
  feats_cmd->callback([&] { run_features(feats, feats_cmd); });

  // lda-fit ----------------------------------------------------------------
  LdaFitOptions ldafit;
  auto* ldafit_cmd = app.add_subcommand(
      "lda-fit", "fit the topic model on per-user documents");
  ldafit_cmd->add_option("--corpus", ldafit.corpus_path, "corpus JSONL file")
      ->required();
  add_assets_flag(ldafit_cmd, ldafit.assets_dir);
  ldafit_cmd->add_option("--k", ldafit.lda.topics, "topic count")
      ->capture_default_str();
  ldafit_cmd->add_option("--iters", ldafit.lda.iterations, "Gibbs sweeps")
      ->capture_default_str();
  ldafit_cmd->add_option("--alpha", ldafit.lda.alpha,
                         "document-topic prior; negative = 50/K")
      ->capture_default_str();
  ldafit_cmd->add_option("--beta", ldafit.lda.beta, "topic-word prior")
      ->capture_default_str();
  ldafit_cmd->add_option("--seed", ldafit.lda.seed, "sampler seed")
      ->capture_default_str();
  ldafit_cmd->add_option("--l-max", ldafit.l_max, "max tweets per user")
      ->capture_default_str();
  ldafit_cmd->add_option("--n-max", ldafit.n_max, "max tokens per tweet")
      ->capture_default_str();
  ldafit_cmd->add_option("--out", ldafit.out_dir, "output directory")
      ->required();
  ldafit_cmd->callback([&] { run_lda_fit(ldafit, ldafit_cmd); });

  // train ------------------------------------------------------------------
  TrainOptions train;
  auto* train_cmd = app.add_subcommand(
      "train", "prepare data, train the fused model, save a bundle");
  add_data_flags(train_cmd, train.data);
  train_cmd->add_option("--out", train.out_dir, "output directory")
      ->required();
  train_cmd->callback([&] { run_train(train, train_cmd); });

  // eval -------------------------------------------------------------------
  EvalOptions evaluate;
  auto* eval_cmd = app.add_subcommand(
      "eval", "score a corpus with a trained bundle");
  eval_cmd->add_option("--bundle", evaluate.bundle_dir,
                       "bundle directory written by train")
      ->required();
  eval_cmd->add_option("--corpus", evaluate.corpus_path, "corpus JSONL file")
      ->required();
  add_assets_flag(eval_cmd, evaluate.assets_dir);
  eval_cmd->add_option("--out", evaluate.out_dir, "output directory")
      ->required();
  eval_cmd->callback([&] { run_eval(evaluate, eval_cmd); });

  // ablate -----------------------------------------------------------------
  AblateOptions ablate;
  auto* ablate_cmd = app.add_subcommand(
      "ablate", "retrain and score the branch/modality ablation grid");
  add_data_flags(ablate_cmd, ablate.data);
  ablate_cmd->add_option("--only", ablate.only,
                         "comma-separated subset of the standard grid")
      ->delimiter(',');
  ablate_cmd->add_option("--out", ablate.out_dir, "output directory")
      ->required();
  ablate_cmd->callback([&] { run_ablate(ablate, ablate_cmd); });

  // sweep ------------------------------------------------------------------
  SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "accuracy as a function of timeline truncation length");
  add_data_flags(sweep_cmd, sweep.data);
  sweep_cmd->add_option("--lengths", sweep.lengths,
                        "comma-separated truncation lengths")
      ->delimiter(',')
      ->required();
  sweep_cmd->add_option("--out", sweep.out_dir, "output directory")
      ->required();
  sweep_cmd->callback([&] { run_sweep(sweep, sweep_cmd); });

  // explain ----------------------------------------------------------------
  ExplainOptions expl;
  auto* explain_cmd = app.add_subcommand(
      "explain", "attention reports (HTML+JSON) and symptom wordclouds");
  explain_cmd->add_option("--bundle", expl.bundle_dir,
                          "bundle directory written by train")
      ->required();
  explain_cmd->add_option("--corpus", expl.corpus_path, "corpus JSONL file")
      ->required();
  add_assets_flag(explain_cmd, expl.assets_dir);
  explain_cmd->add_option("--user", expl.users,
                          "user id(s) to report on; default all")
      ->delimiter(',');
  explain_cmd->add_option("--cloud-top", expl.cloud_top,
                          "tokens kept per symptom category")
      ->capture_default_str();
  explain_cmd->add_option("--out", expl.out_dir, "output directory")
      ->required();
  explain_cmd->callback([&] { run_explain(expl, explain_cmd); });

  // gradcheck --------------------------------------------------------------
  GradcheckOptions gradcheck;
  auto* gradcheck_cmd = app.add_subcommand(
      "gradcheck",
      "verify model gradients against central finite differences");
  add_assets_flag(gradcheck_cmd, gradcheck.assets_dir);
  gradcheck_cmd->add_option("--seed", gradcheck.seed, "check seed")
      ->capture_default_str();
  gradcheck_cmd->add_option("--users", gradcheck.batch_users, "batch size")
      ->capture_default_str();
  gradcheck_cmd->add_option("--samples", gradcheck.samples,
                            "coordinates probed per tensor")
      ->capture_default_str();
  gradcheck_cmd->add_option("--tol", gradcheck.tolerance,
                            "max allowed relative error")
      ->capture_default_str();
  gradcheck_cmd->add_option("--out", gradcheck.out_dir,
                            "optional output directory for gradcheck.json");
  gradcheck_cmd->callback([&] { run_gradcheck(gradcheck, gradcheck_cmd); });

  // baseline-nb ------------------------------------------------------------
  NbOptions nb;
  auto* nb_cmd = app.add_subcommand(
      "baseline-nb", "naive-bayes bag-of-words baseline on the same split");
  nb_cmd->add_option("--corpus", nb.corpus_path, "corpus JSONL file")
      ->required();
  add_assets_flag(nb_cmd, nb.assets_dir);
  add_split_flags(nb_cmd, nb.split);
  nb_cmd->add_option("--l-max", nb.l_max, "max tweets per user")
      ->capture_default_str();
  nb_cmd->add_option("--n-max", nb.n_max, "max tokens per tweet")
      ->capture_default_str();
  nb_cmd->add_option("--out", nb.out_dir, "output directory")->required();
  nb_cmd->callback([&] { run_baseline_nb(nb, nb_cmd); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const UsageError& e) {
    std::cerr << "error: usage: " << e.what() << '\n';
    return kUsageExit;
  } catch (const IoError& e) {
    std::cerr << "error: io: " << e.what() << '\n';
    return kIoExit;
  } catch (const DataError& e) {
    std::cerr << "error: data: " << e.what() << '\n';
    return kDataExit;
  } catch (const NumericError& e) {
    std::cerr << "error: numeric: " << e.what() << '\n';
    return kNumericExit;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return kInternalExit;
  }
  return 0;
}
