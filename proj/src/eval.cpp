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

#include "mdhan/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "mdhan/errors.hpp"

namespace mdhan::eval {

namespace {

// precision/recall/F1 of one class given its own tp/fp/fn
ClassScores class_scores(int tp, int fp, int fn) {
  ClassScores s;
  s.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  s.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  s.f1 = s.precision + s.recall > 0.0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

}  // namespace

ConfusionMatrix confusion(const std::vector<int>& truth,
                          const std::vector<int>& predicted) {
  if (truth.size() != predicted.size())
    throw UsageError("label/prediction count mismatch");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 1)
      (predicted[i] == 1 ? cm.tp : cm.fn)++;
    else
      (predicted[i] == 1 ? cm.fp : cm.tn)++;
  }
  return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  if (cm.tp < 0 || cm.fp < 0 || cm.fn < 0 || cm.tn < 0)
    throw UsageError("confusion-matrix counts must be non-negative");
  if (cm.total() == 0)
    throw UsageError("cannot compute metrics over zero evaluations");

  const ClassScores pos = class_scores(cm.tp, cm.fp, cm.fn);
  // the negative class sees inverted roles: tn are its hits, fn its false
  // alarms (true positives predicted negative), fp its misses
  const ClassScores neg = class_scores(cm.tn, cm.fn, cm.fp);

  MetricsReport report;
  report.accuracy = static_cast<double>(cm.tp + cm.tn) / cm.total();
  report.precision = 0.5 * (pos.precision + neg.precision);
  report.recall = 0.5 * (pos.recall + neg.recall);
  report.f1 = 0.5 * (pos.f1 + neg.f1);
  report.positive = pos;
  report.negative = neg;
  return report;
}

MetricsReport evaluate(const model::ModelParams& params,
                       const std::vector<model::TrainUser>& test) {
  if (test.empty()) throw UsageError("cannot evaluate on zero users");
  std::vector<int> truth, predicted;
  truth.reserve(test.size());
  predicted.reserve(test.size());
  for (const auto& user : test) {
    truth.push_back(user.label);
    predicted.push_back(model::classify(model::encode_user(params, user).yhat));
  }
  return metrics(confusion(truth, predicted));
}

void write_metrics_json(const std::string& path, const MetricsReport& report) {
  nlohmann::json j;
  j["accuracy"] = report.accuracy;
  j["precision"] = report.precision;
  j["recall"] = report.recall;
  j["f1"] = report.f1;
  j["averaging"] = report.averaging;
  j["positive"] = {{"precision", report.positive.precision},
                   {"recall", report.positive.recall},
                   {"f1", report.positive.f1}};
  j["negative"] = {{"precision", report.negative.precision},
                   {"recall", report.negative.recall},
                   {"f1", report.negative.f1}};
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

std::vector<AblationConfig> standard_ablations() {
  std::vector<AblationConfig> configs;
  auto add = [&](std::string name, bool text, bool feats,
                 features::ModalityMask mask) {
    configs.push_back({std::move(name), text, feats, mask});
  };
  const features::ModalityMask all;
  add("MDHAN", true, true, all);
  add("HAN", true, false, all);
  add("MM", false, true, all);

  auto without = [&](const char* name, bool social, bool emotion, bool topic,
                     bool domain) {
    features::ModalityMask m;
    m.social = social;
    m.emotion = emotion;
    m.topic = topic;
    m.domain = domain;
    return std::pair<std::string, features::ModalityMask>(name, m);
  };
  for (auto& [name, mask] : {without("MDHAN-S", false, true, true, true),
                             without("MDHAN-E", true, false, true, true),
                             without("MDHAN-T", true, true, false, true),
                             without("MDHAN-D", true, true, true, false)})
    add(name, true, true, mask);
  for (auto& [name, mask] : {without("S+HAN", true, false, false, false),
                             without("E+HAN", false, true, false, false),
                             without("T+HAN", false, false, true, false),
                             without("D+HAN", false, false, false, true)})
    add(name, true, true, mask);
  return configs;
}

std::vector<AblationResult> run_ablations(
    const std::vector<AblationConfig>& configs,
    const std::vector<model::TrainUser>& train,
    const std::vector<model::TrainUser>& test, const model::ModelConfig& base,
    const Eigen::MatrixXd& embeddings) {
  std::vector<AblationResult> results;
  for (const auto& ablation : configs) {
    for (const auto& other : results)
      if (other.name == ablation.name)
        throw UsageError("duplicate ablation name " + ablation.name);
    model::ModelConfig cfg = base;
    cfg.use_text = ablation.use_text;
    cfg.use_features = ablation.use_features;
    cfg.mask = ablation.mask;
    auto trained = model::train(train, cfg, embeddings);
    results.push_back({ablation.name, evaluate(trained.params, test)});
  }
  return results;
}

void write_ablation_csv(const std::string& path,
                        const std::vector<AblationResult>& results) {
  auto out = open_out(path);
  out.precision(17);
  out << "name,accuracy,precision,recall,f1\n";
  for (const auto& r : results)
    out << r.name << ',' << r.report.accuracy << ',' << r.report.precision
        << ',' << r.report.recall << ',' << r.report.f1 << '\n';
}

std::vector<SweepPoint> tweet_count_sweep(std::vector<int> l_values,
                                          const DataProvider& provider,
                                          const model::ModelConfig& base) {
  std::sort(l_values.begin(), l_values.end());
  l_values.erase(std::unique(l_values.begin(), l_values.end()), l_values.end());
  std::vector<SweepPoint> curve;
  for (int l : l_values) {
    if (l < 1) throw UsageError("tweet-count sweep needs lengths >= 1");
    PreparedData data = provider(l);
    model::ModelConfig cfg = base;
    cfg.l_max = l;
    auto trained = model::train(data.train, cfg, std::move(data.embeddings));
    curve.push_back({l, evaluate(trained.params, data.test)});
  }
  return curve;
}

void write_sweep_csv(const std::string& path,
                     const std::vector<SweepPoint>& curve) {
  auto out = open_out(path);
  out.precision(17);
  out << "max_tweets,accuracy,precision,recall,f1\n";
  for (const auto& p : curve)
    out << p.max_tweets << ',' << p.report.accuracy << ',' << p.report.precision
        << ',' << p.report.recall << ',' << p.report.f1 << '\n';
}

NbModel nb_train(const std::vector<std::vector<std::string>>& docs,
                 const std::vector<int>& labels) {
  if (docs.size() != labels.size())
    throw UsageError("document/label count mismatch");
  if (docs.empty()) throw UsageError("cannot train on zero documents");
  int class_docs[2] = {0, 0};
  for (int y : labels) {
    if (y != 0 && y != 1) throw DataError("labels must be 0 or 1");
    ++class_docs[y];
  }
  if (class_docs[0] == 0 || class_docs[1] == 0)
    throw DataError("training set must contain both classes");

  NbModel m;
  for (const auto& doc : docs) {
    for (const auto& token : doc) {
      if (m.index.emplace(token, static_cast<int>(m.vocab.size())).second)
        m.vocab.push_back(token);
    }
  }

  Eigen::MatrixXd counts =
      Eigen::MatrixXd::Zero(2, static_cast<Eigen::Index>(m.vocab.size()));
  for (std::size_t d = 0; d < docs.size(); ++d)
    for (const auto& token : docs[d]) counts(labels[d], m.index.at(token)) += 1.0;

  const double v = static_cast<double>(m.vocab.size());
  m.log_likelihood.resize(2, counts.cols());
  for (int c = 0; c < 2; ++c) {
    const double total = counts.row(c).sum();
    for (Eigen::Index w = 0; w < counts.cols(); ++w)
      m.log_likelihood(c, w) = std::log((counts(c, w) + 1.0) / (total + v));
    m.log_prior(c) =
        std::log(static_cast<double>(class_docs[c]) / static_cast<double>(docs.size()));
  }
  return m;
}

namespace {

Eigen::Vector2d nb_log_scores(const NbModel& m,
                              const std::vector<std::string>& tokens) {
  Eigen::Vector2d score = m.log_prior;
  for (const auto& token : tokens) {
    auto it = m.index.find(token);
    if (it == m.index.end()) continue;  // unseen tokens carry no evidence
    score(0) += m.log_likelihood(0, it->second);
    score(1) += m.log_likelihood(1, it->second);
  }
  return score;
}

}  // namespace

Eigen::Vector2d nb_posterior(const NbModel& m,
                             const std::vector<std::string>& tokens) {
  const Eigen::Vector2d score = nb_log_scores(m, tokens);
  const double peak = score.maxCoeff();
  const Eigen::Vector2d shifted = (score.array() - peak).exp();
  return shifted / shifted.sum();
}

int nb_predict(const NbModel& m, const std::vector<std::string>& tokens) {
  const Eigen::Vector2d score = nb_log_scores(m, tokens);
  return score(1) > score(0) ? 1 : 0;  // ties go to label 0
}

MetricsReport nb_metrics(const NbModel& m,
                         const std::vector<std::vector<std::string>>& docs,
                         const std::vector<int>& labels) {
  if (docs.size() != labels.size())
    throw UsageError("document/label count mismatch");
  std::vector<int> predicted;
  predicted.reserve(docs.size());
  for (const auto& doc : docs) predicted.push_back(nb_predict(m, doc));
  return metrics(confusion(labels, predicted));
}

}  // namespace mdhan::eval
