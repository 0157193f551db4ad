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

#ifndef MDHAN_PIPELINE_HPP
#define MDHAN_PIPELINE_HPP

#include <string>
#include <vector>

#include "mdhan/corpus.hpp"
#include "mdhan/eval.hpp"
#include "mdhan/features.hpp"
#include "mdhan/lexicons.hpp"
#include "mdhan/model.hpp"
#include "mdhan/topics.hpp"

// Glue between raw corpora and the model: asset loading, tokenization,
// vocabulary/embedding construction, topic fitting, feature normalization,
// and persistence of everything a trained model needs at serving time.
namespace mdhan::pipeline {

// ---------------------------------------------------------------------------
// assets

// Every lexical resource the feature extractor consumes. Loaded from fixed
// file names inside one directory: stopwords.txt, emoji_sentiment.tsv,
// vad_norms.csv, symptom_seeds.txt, antidepressants.txt.
struct Assets {
  corpus::StopwordSet stopwords;
  lex::EmojiLexicon emoji;
  lex::VadLexicon vad;
  lex::SymptomLexicon symptoms;
  lex::AntidepressantLexicon antidepressants;
};

Assets load_assets(const std::string& dir);

// ---------------------------------------------------------------------------
// data preparation

// String-level view of one encoded timeline, index-aligned with the id
// matrix in the matching TrainUser (same truncation, same token order), so
// attention weights can be mapped back to words.
struct UserTokens {
  std::vector<std::string> texts;
  std::vector<std::vector<std::string>> tokens;
};

// One document per user: the preprocessed tokens of the first l_max tweets,
// concatenated. This is both the topic-model training input and the shape
// the per-user topic features are inferred from.
std::vector<std::vector<std::string>> user_documents(
    const corpus::Corpus& corpus, const corpus::StopwordSet& stopwords,
    int l_max, int n_max);

struct PrepareConfig {
  model::ModelConfig model;
  topics::LdaConfig lda;  // topic count must match the feature layout slice
  corpus::SplitSpec split;
  // Path to a "token v1 .. vd" embedding file; empty builds a deterministic
  // synthetic table over the train-split vocabulary (seeded by model.seed).
  std::string embeddings_path;
};

// The product of `prepare`: model-ready splits plus every fitted resource.
// All fitting (topics, normalization, vocabulary) sees the train split only.
struct Prepared {
  std::vector<model::TrainUser> train;
  std::vector<model::TrainUser> test;
  std::vector<UserTokens> train_tokens;  // aligned with train/test
  std::vector<UserTokens> test_tokens;
  lex::EmbeddingTable embeddings;
  topics::LdaModel lda;
  features::NormStats norm;
};

// Splits, truncates timelines to l_max, fits topics and normalization on the
// train side, and encodes both sides. Deterministic for fixed inputs.
Prepared prepare(const corpus::Corpus& all, const PrepareConfig& cfg,
                 const Assets& assets);

// Encodes one record against already-fitted resources (a loaded bundle):
// same truncation, tokenization, feature assembly, and normalization that
// `prepare` applied to the training data.
struct EncodedUser {
  model::TrainUser user;
  UserTokens tokens;
};
EncodedUser encode_record(const corpus::UserRecord& rec,
                          const model::ModelConfig& cfg, const Assets& assets,
                          const lex::EmbeddingTable& table,
                          const topics::LdaModel& lda,
                          const features::NormStats& norm);

// ---------------------------------------------------------------------------
// model bundles

// A trained model plus the fitted resources needed to score fresh corpora.
// On disk: bundle.json (config + normalization), checkpoint.bin (tensors),
// embeddings.txt (vocabulary + vectors), lda.bin (topic counts).
struct Bundle {
  model::ModelParams params;
  lex::EmbeddingTable table;  // params.embeddings mirrors table.matrix()
  topics::LdaModel lda;
  features::NormStats norm;
};

void save_bundle(const std::string& dir, const Bundle& bundle);
Bundle load_bundle(const std::string& dir);

// ModelConfig <-> JSON (the bundle.json "model" object; also used for the
// resolved-config echo of training runs).
std::string model_config_json(const model::ModelConfig& cfg);
model::ModelConfig model_config_from_json(const std::string& text);

// ---------------------------------------------------------------------------
// derived workflows

// Finite-difference check of the whole model's gradients on a user batch.
// Dropout is forced off; the loss is the batch-mean classification loss.
ad::GradCheckReport model_grad_check(const std::vector<model::TrainUser>& users,
                                     model::ModelConfig cfg,
                                     const Eigen::MatrixXd& embeddings,
                                     const ad::GradCheckOptions& opts = {});

// Provider for the tweet-count sweep: re-runs `prepare` at each truncation
// length so topics and features are refit on what the model actually sees.
eval::DataProvider sweep_provider(corpus::Corpus all, PrepareConfig cfg,
                                  Assets assets);

}  // namespace mdhan::pipeline

#endif  // MDHAN_PIPELINE_HPP
