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

#ifndef S2D_METRICS_H_
#define S2D_METRICS_H_

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "s2d/dirichlet.h"

namespace s2d {

inline constexpr std::size_t kDefaultEceBins = 15;

double accuracy(std::span<const CategoricalDist> preds,
                std::span<const int> labels);
double nll(std::span<const CategoricalDist> preds, std::span<const int> labels);
// Equal-width confidence bins over (0, 1]; returned as a percentage.
double ece(std::span<const CategoricalDist> preds, std::span<const int> labels,
           std::size_t n_bins = kDefaultEceBins);

// Higher score = more likely out-of-distribution (positive).
struct ScoredSample {
  double score = 0.0;
  bool is_positive = false;
};

// Mann-Whitney statistic, ties counted 1/2. Throws ContractError unless both
// classes are present.
double auroc(std::span<const ScoredSample> samples);
// Step-wise average precision over a descending sweep with tied scores
// grouped.
double aupr(std::span<const ScoredSample> samples);

enum class ScoreKind { kConfidence, kTotal, kData, kKnowledge };
inline constexpr std::array<ScoreKind, 4> kAllScoreKinds = {
    ScoreKind::kConfidence, ScoreKind::kTotal, ScoreKind::kData,
    ScoreKind::kKnowledge};

std::string to_string(ScoreKind kind);

// Per-input prediction and uncertainty. Plain categorical models leave data
// and knowledge empty.
struct UncertaintyRecord {
  std::vector<double> predictive;
  double confidence = 0.0;
  double total = 0.0;
  std::optional<double> data;
  std::optional<double> knowledge;
  std::optional<std::size_t> n_samples;

  // The requested score, oriented so that higher means more uncertain
  // (confidence is negated). Empty when the model does not provide it.
  std::optional<double> score(ScoreKind kind) const;
};

nlohmann::json to_json(const UncertaintyRecord& r);

struct DetectionResult {
  double auroc = 0.0;
  double aupr = 0.0;
};

// ID rows are negatives, OOD rows positives. Throws ContractError when a
// record lacks the requested score.
DetectionResult ood_detect(std::span<const UncertaintyRecord> id,
                           std::span<const UncertaintyRecord> ood,
                           ScoreKind kind);

struct EvalReport {
  double accuracy = 0.0;
  double nll = 0.0;
  double ece = 0.0;
  // One entry per OOD set; null where the model lacks the score.
  std::vector<std::pair<std::string, std::array<std::optional<DetectionResult>, 4>>>
      detection;

  nlohmann::json to_json() const;
};

}  // namespace s2d

#endif  // S2D_METRICS_H_
