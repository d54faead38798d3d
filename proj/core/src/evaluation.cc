/*
 * Copyright 2026 The s2d Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "s2d/evaluation.h"

#include <algorithm>

#include "s2d/dirichlet.h"
#include "s2d/ensemble.h"
#include "s2d/errors.h"
#include "s2d/random.h"
#include "s2d/specfun.h"

namespace s2d {
namespace {

std::vector<double> row_values(const Eigen::MatrixXd& m, Eigen::Index i) {
  std::vector<double> out(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) out[c] = m(i, c);
  return out;
}

UncertaintyRecord from_summary(PredictiveUncertainty u) {
  UncertaintyRecord r;
  r.predictive = std::move(u.predictive);
  r.confidence = u.confidence;
  r.total = u.total;
  r.data = u.data;
  r.knowledge = u.knowledge;
  return r;
}

}  // namespace

std::string to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::kCategorical:
      return "categorical";
    case PredictorKind::kDirichlet:
      return "dirichlet";
    case PredictorKind::kCategoricalEnsemble:
      return "categorical_ensemble";
    case PredictorKind::kDirichletEnsemble:
      return "dirichlet_ensemble";
    case PredictorKind::kMcDropout:
      return "mc_dropout";
    case PredictorKind::kGaussian:
      return "gaussian";
  }
  return "unknown";
}

Predictor Predictor::from_models(std::vector<NetworkParams> models) {
  if (models.empty()) throw ContractError("predictor needs at least one model");
  const HeadWiring wiring = models.front().wiring;
  for (const auto& m : models) {
    m.validate();
    if (m.wiring != wiring) {
      throw ContractError("ensemble members must share the same head wiring");
    }
    if (m.input_dim() != models.front().input_dim() ||
        m.num_classes() != models.front().num_classes()) {
      throw ContractError("ensemble members must share input and class count");
    }
  }
  if (models.size() == 1) {
    switch (wiring) {
      case HeadWiring::kStandard:
        return Predictor(PredictorKind::kCategorical, std::move(models));
      case HeadWiring::kSelfDistill:
        return Predictor(PredictorKind::kDirichlet, std::move(models));
      case HeadWiring::kGaussian:
        return Predictor(PredictorKind::kGaussian, std::move(models));
    }
  }
  switch (wiring) {
    case HeadWiring::kStandard:
      return Predictor(PredictorKind::kCategoricalEnsemble, std::move(models));
    case HeadWiring::kSelfDistill:
      return Predictor(PredictorKind::kDirichletEnsemble, std::move(models));
    case HeadWiring::kGaussian:
      break;
  }
  throw ContractError("ensembles of Gaussian-head models are not supported");
}

Predictor Predictor::mc_dropout(NetworkParams model, std::size_t passes,
                                std::uint64_t seed) {
  model.validate();
  if (passes == 0) throw ContractError("MC dropout needs at least one pass");
  if (!model.has_dropout()) {
    throw ContractError("MC dropout needs a model with a dropout rate > 0");
  }
  std::vector<NetworkParams> models;
  models.push_back(std::move(model));
  Predictor p(PredictorKind::kMcDropout, std::move(models));
  p.samples_ = passes;
  p.seed_ = seed;
  return p;
}

void Predictor::set_gauss_sampling(std::size_t n_samples, std::uint64_t seed) {
  if (n_samples == 0) throw ContractError("need at least one Gaussian sample");
  if (kind_ == PredictorKind::kMcDropout) return;
  samples_ = n_samples;
  seed_ = seed;
}

std::vector<UncertaintyRecord> Predictor::predict(const Eigen::MatrixXd& x) const {
  if (x.cols() != input_dim()) {
    throw ContractError("input has " + std::to_string(x.cols()) +
                        " features, model expects " + std::to_string(input_dim()));
  }
  std::vector<UncertaintyRecord> out;
  out.reserve(static_cast<std::size_t>(x.rows()));
  switch (kind_) {
    case PredictorKind::kCategorical: {
      const Eigen::MatrixXd logits = forward_deterministic(models_[0], x);
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        UncertaintyRecord r;
        r.predictive = softmax(row_values(logits, i));
        r.confidence = *std::max_element(r.predictive.begin(), r.predictive.end());
        r.total = entropy(r.predictive);
        out.push_back(std::move(r));
      }
      break;
    }
    case PredictorKind::kDirichlet: {
      const Eigen::MatrixXd logits = forward_deterministic(models_[0], x);
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const DirichletParams d = alpha_from_logits(row_values(logits, i));
        out.push_back(from_summary(dir_ensemble_uncertainties(
            DirichletEnsemble({d}))));
      }
      break;
    }
    case PredictorKind::kCategoricalEnsemble:
    case PredictorKind::kDirichletEnsemble: {
      std::vector<Eigen::MatrixXd> logits;
      for (const auto& m : models_) logits.push_back(forward_deterministic(m, x));
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        if (kind_ == PredictorKind::kCategoricalEnsemble) {
          std::vector<CategoricalDist> members;
          for (const auto& z : logits) members.emplace_back(softmax(row_values(z, i)));
          out.push_back(from_summary(
              cat_ensemble_uncertainties(CategoricalEnsemble(std::move(members)))));
        } else {
          std::vector<DirichletParams> members;
          for (const auto& z : logits) members.push_back(alpha_from_logits(row_values(z, i)));
          out.push_back(from_summary(
              dir_ensemble_uncertainties(DirichletEnsemble(std::move(members)))));
        }
      }
      break;
    }
    case PredictorKind::kMcDropout: {
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const std::vector<double> input = row_values(x, i);
        auto members = forward_mc_dropout(models_[0], input, samples_,
                                          derive_seed(seed_, static_cast<std::uint64_t>(i)));
        UncertaintyRecord r = from_summary(
            cat_ensemble_uncertainties(CategoricalEnsemble(std::move(members))));
        r.n_samples = samples_;
        out.push_back(std::move(r));
      }
      break;
    }
    case PredictorKind::kGaussian: {
      const GaussianOutputs g = forward_gaussian(models_[0], x);
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const DiagGaussian dist(row_values(g.mu, i), row_values(g.sigma, i));
        UncertaintyRecord r = from_summary(gauss_uncertainties(
            dist, samples_, derive_seed(seed_, static_cast<std::uint64_t>(i))));
        r.n_samples = samples_;
        out.push_back(std::move(r));
      }
      break;
    }
  }
  return out;
}

std::vector<CategoricalDist> predictive_of(
    std::span<const UncertaintyRecord> records) {
  std::vector<CategoricalDist> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    std::vector<double> p = r.predictive;
    double sum = 0.0;
    for (double v : p) sum += v;
    for (double& v : p) v /= sum;
    out.emplace_back(std::move(p));
  }
  return out;
}

EvalReport evaluate(const Predictor& predictor, const Dataset& test,
                    const std::vector<std::pair<std::string, Dataset>>& ood_sets,
                    std::size_t ece_bins) {
  test.validate();
  if (!test.labeled()) throw ContractError("evaluation data must be labeled");
  const auto id_records = predictor.predict(test.features);
  const auto preds = predictive_of(id_records);
  EvalReport report;
  report.accuracy = accuracy(preds, test.labels);
  report.nll = nll(preds, test.labels);
  report.ece = ece(preds, test.labels, ece_bins);
  for (const auto& [name, ood] : ood_sets) {
    const auto ood_records = predictor.predict(ood.features);
    std::array<std::optional<DetectionResult>, 4> results;
    for (std::size_t k = 0; k < kAllScoreKinds.size(); ++k) {
      const ScoreKind kind = kAllScoreKinds[k];
      if (!predictor.decomposes() &&
          (kind == ScoreKind::kData || kind == ScoreKind::kKnowledge)) {
        continue;
      }
      results[k] = ood_detect(id_records, ood_records, kind);
    }
    report.detection.emplace_back(name, results);
  }
  return report;
}

}  // namespace s2d
