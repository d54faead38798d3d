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

#include "s2d/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "s2d/errors.h"

namespace s2d {
namespace {

void check_aligned(std::size_t preds, std::size_t labels, const char* what) {
  if (preds == 0) throw ContractError(std::string(what) + ": empty input");
  if (preds != labels) {
    throw ContractError(std::string(what) + ": predictions and labels differ "
                        "in length");
  }
}

std::size_t check_label(int label, std::size_t k) {
  if (label < 0 || static_cast<std::size_t>(label) >= k) {
    throw ContractError("label " + std::to_string(label) + " out of range");
  }
  return static_cast<std::size_t>(label);
}

std::pair<std::size_t, std::size_t> count_classes(
    std::span<const ScoredSample> samples) {
  std::size_t pos = 0;
  for (const auto& s : samples) {
    if (!std::isfinite(s.score)) {
      throw ContractError("detection scores must be finite");
    }
    if (s.is_positive) ++pos;
  }
  const std::size_t neg = samples.size() - pos;
  if (pos == 0 || neg == 0) {
    throw ContractError("detection metrics need both positive and negative "
                        "samples");
  }
  return {pos, neg};
}

}  // namespace

double accuracy(std::span<const CategoricalDist> preds,
                std::span<const int> labels) {
  check_aligned(preds.size(), labels.size(), "accuracy");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].argmax() == check_label(labels[i], preds[i].size())) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

double nll(std::span<const CategoricalDist> preds, std::span<const int> labels) {
  check_aligned(preds.size(), labels.size(), "nll");
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double p = preds[i][check_label(labels[i], preds[i].size())];
    total -= std::log(std::max(p, kProbFloor));
  }
  return total / static_cast<double>(preds.size());
}

double ece(std::span<const CategoricalDist> preds, std::span<const int> labels,
           std::size_t n_bins) {
  check_aligned(preds.size(), labels.size(), "ece");
  if (n_bins == 0) throw ContractError("ece: need at least one bin");
  std::vector<double> conf_sum(n_bins, 0.0);
  std::vector<double> correct(n_bins, 0.0);
  std::vector<std::size_t> count(n_bins, 0);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double conf = preds[i].max();
    const auto raw = static_cast<long>(std::ceil(conf * static_cast<double>(n_bins))) - 1;
    const auto bin = static_cast<std::size_t>(
        std::clamp<long>(raw, 0, static_cast<long>(n_bins) - 1));
    conf_sum[bin] += conf;
    if (preds[i].argmax() == check_label(labels[i], preds[i].size())) {
      correct[bin] += 1.0;
    }
    ++count[bin];
  }
  double out = 0.0;
  const double n = static_cast<double>(preds.size());
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (count[b] == 0) continue;
    const double m = static_cast<double>(count[b]);
    out += m / n * std::abs(correct[b] / m - conf_sum[b] / m);
  }
  return 100.0 * out;
}

double auroc(std::span<const ScoredSample> samples) {
  const auto [pos, neg] = count_classes(samples);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return samples[a].score < samples[b].score;
  });
  // Sum of (1-based, tie-averaged) ranks of the positives.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && samples[order[j]].score == samples[order[i]].score) {
      ++j;
    }
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (samples[order[t]].is_positive) rank_sum += avg_rank;
    }
    i = j;
  }
  const double p = static_cast<double>(pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

double aupr(std::span<const ScoredSample> samples) {
  const auto [pos, neg] = count_classes(samples);
  (void)neg;
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return samples[a].score > samples[b].score;
  });
  double area = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t new_tp = 0;
    while (j < order.size() && samples[order[j]].score == samples[order[i]].score) {
      if (samples[order[j]].is_positive) {
        ++new_tp;
      } else {
        ++fp;
      }
      ++j;
    }
    tp += new_tp;
    if (new_tp > 0) {
      const double precision =
          static_cast<double>(tp) / static_cast<double>(tp + fp);
      area += static_cast<double>(new_tp) / static_cast<double>(pos) * precision;
    }
    i = j;
  }
  return area;
}

std::string to_string(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::kConfidence:
      return "confidence";
    case ScoreKind::kTotal:
      return "total";
    case ScoreKind::kData:
      return "data";
    case ScoreKind::kKnowledge:
      return "knowledge";
  }
  return "unknown";
}

std::optional<double> UncertaintyRecord::score(ScoreKind kind) const {
  switch (kind) {
    case ScoreKind::kConfidence:
      return -confidence;
    case ScoreKind::kTotal:
      return total;
    case ScoreKind::kData:
      return data;
    case ScoreKind::kKnowledge:
      return knowledge;
  }
  return std::nullopt;
}

nlohmann::json to_json(const UncertaintyRecord& r) {
  nlohmann::json j{{"predictive", r.predictive},
                   {"confidence", r.confidence},
                   {"total", r.total}};
  j["data"] = r.data ? nlohmann::json(*r.data) : nlohmann::json(nullptr);
  j["knowledge"] =
      r.knowledge ? nlohmann::json(*r.knowledge) : nlohmann::json(nullptr);
  if (r.n_samples) j["n_samples"] = *r.n_samples;
  return j;
}

DetectionResult ood_detect(std::span<const UncertaintyRecord> id,
                           std::span<const UncertaintyRecord> ood,
                           ScoreKind kind) {
  std::vector<ScoredSample> samples;
  samples.reserve(id.size() + ood.size());
  auto add = [&](const UncertaintyRecord& r, bool positive) {
    const std::optional<double> s = r.score(kind);
    if (!s) {
      throw ContractError("model does not provide " + to_string(kind) +
                          " uncertainty");
    }
    samples.push_back({*s, positive});
  };
  for (const auto& r : id) add(r, false);
  for (const auto& r : ood) add(r, true);
  return {auroc(samples), aupr(samples)};
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json sets = nlohmann::json::object();
  for (const auto& [name, results] : detection) {
    nlohmann::json per_score = nlohmann::json::object();
    for (std::size_t i = 0; i < kAllScoreKinds.size(); ++i) {
      const auto& r = results[i];
      per_score[s2d::to_string(kAllScoreKinds[i])] =
          r ? nlohmann::json{{"auroc", r->auroc}, {"aupr", r->aupr}}
            : nlohmann::json(nullptr);
    }
    sets[name] = per_score;
  }
  return nlohmann::json{{"accuracy", accuracy},
                        {"nll", nll},
                        {"ece_percent", ece},
                        {"ood", sets}};
}

}  // namespace s2d
