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

#ifndef MDHAN_EVAL_HPP
#define MDHAN_EVAL_HPP

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "mdhan/model.hpp"

namespace mdhan::eval {

struct ConfusionMatrix {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  int tn = 0;
  int total() const { return tp + fp + fn + tn; }
};

ConfusionMatrix confusion(const std::vector<int>& truth,
                          const std::vector<int>& predicted);

// Headline numbers are macro-averaged over the two classes; the per-class
// scores are kept alongside. A class with no predicted positives gets
// precision 0 (same convention for recall without actual positives); F1 is 0
// when precision + recall is 0.
struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  ClassScores positive;
  ClassScores negative;
  std::string averaging = "macro";
};

MetricsReport metrics(const ConfusionMatrix& cm);

// Threshold-0.5 predictions over the test users; order-invariant.
MetricsReport evaluate(const model::ModelParams& params,
                       const std::vector<model::TrainUser>& test);

void write_metrics_json(const std::string& path, const MetricsReport& report);

// ---------------------------------------------------------------------------
// ablations

struct AblationConfig {
  std::string name;
  bool use_text = true;
  bool use_features = true;
  features::ModalityMask mask;
};

// The full grid: the combined model, each branch alone, the combined model
// minus one modality slice, and each slice paired with the text branch.
std::vector<AblationConfig> standard_ablations();

struct AblationResult {
  std::string name;
  MetricsReport report;
};

// Retrains from scratch per configuration under the shared base config
// (same seed, same data) and evaluates on the shared test split.
std::vector<AblationResult> run_ablations(
    const std::vector<AblationConfig>& configs,
    const std::vector<model::TrainUser>& train,
    const std::vector<model::TrainUser>& test, const model::ModelConfig& base,
    const Eigen::MatrixXd& embeddings);

void write_ablation_csv(const std::string& path,
                        const std::vector<AblationResult>& results);

// ---------------------------------------------------------------------------
// tweet-count sweep

// Everything one training run needs; the provider re-prepares it at each
// truncation length so features and topics reflect the truncated data.
struct PreparedData {
  std::vector<model::TrainUser> train;
  std::vector<model::TrainUser> test;
  Eigen::MatrixXd embeddings;
};
using DataProvider = std::function<PreparedData(int max_tweets)>;

struct SweepPoint {
  int max_tweets = 0;
  MetricsReport report;
};

// Trains and evaluates at each distinct truncation length (duplicates
// dropped, ascending order).
std::vector<SweepPoint> tweet_count_sweep(std::vector<int> l_values,
                                          const DataProvider& provider,
                                          const model::ModelConfig& base);

void write_sweep_csv(const std::string& path,
                     const std::vector<SweepPoint>& curve);

// ---------------------------------------------------------------------------
// multinomial Naive Bayes baseline

// Bag-of-words with add-one smoothing, scored in log space. Tokens unseen
// in training are skipped at prediction time; ties resolve to label 0.
struct NbModel {
  std::vector<std::string> vocab;
  std::unordered_map<std::string, int> index;
  Eigen::Vector2d log_prior = Eigen::Vector2d::Zero();
  Eigen::MatrixXd log_likelihood;  // 2 x |vocab|
};

NbModel nb_train(const std::vector<std::vector<std::string>>& docs,
                 const std::vector<int>& labels);

// Normalized P(label | tokens) as (P0, P1).
Eigen::Vector2d nb_posterior(const NbModel& model,
                             const std::vector<std::string>& tokens);

int nb_predict(const NbModel& model, const std::vector<std::string>& tokens);

MetricsReport nb_metrics(const NbModel& model,
                         const std::vector<std::vector<std::string>>& docs,
                         const std::vector<int>& labels);

}  // namespace mdhan::eval

#endif  // MDHAN_EVAL_HPP
