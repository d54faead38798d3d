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

#ifndef S2D_EVALUATION_H_
#define S2D_EVALUATION_H_

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "s2d/data.h"
#include "s2d/gaussian_head.h"
#include "s2d/metrics.h"
#include "s2d/network.h"

namespace s2d {

// How per-input uncertainty is obtained from a set of networks.
enum class PredictorKind {
  kCategorical,          // single softmax model: confidence and total only
  kDirichlet,            // single Dirichlet model, closed form
  kCategoricalEnsemble,  // deep ensemble of softmax models
  kDirichletEnsemble,    // deep ensemble of Dirichlet models
  kMcDropout,            // dropout masks sampled at test time
  kGaussian,             // Gaussian over ln α, Monte-Carlo decomposition
};

std::string to_string(PredictorKind kind);

class Predictor {
 public:
  // One network: kCategorical, kDirichlet or kGaussian by wiring. Several:
  // an ensemble of same-wiring members. Throws ContractError on mixed or
  // Gaussian ensembles.
  static Predictor from_models(std::vector<NetworkParams> models);
  // Test-time dropout ensemble of `passes` members.
  static Predictor mc_dropout(NetworkParams model, std::size_t passes,
                              std::uint64_t seed);

  PredictorKind kind() const { return kind_; }
  // Sample count and base seed for Gaussian heads.
  void set_gauss_sampling(std::size_t n_samples, std::uint64_t seed);
  bool decomposes() const { return kind_ != PredictorKind::kCategorical; }
  Eigen::Index input_dim() const { return models_.front().input_dim(); }
  Eigen::Index num_classes() const { return models_.front().num_classes(); }

  // One record per row of x.
  std::vector<UncertaintyRecord> predict(const Eigen::MatrixXd& x) const;

 private:
  Predictor(PredictorKind kind, std::vector<NetworkParams> models)
      : kind_(kind), models_(std::move(models)) {}

  PredictorKind kind_;
  std::vector<NetworkParams> models_;
  std::size_t samples_ = kDefaultGaussSamples;
  std::uint64_t seed_ = 0;
};

std::vector<CategoricalDist> predictive_of(
    std::span<const UncertaintyRecord> records);

// Accuracy, NLL and %ECE on labeled test data plus detection metrics for every
// score the predictor supports against each named OOD set.
EvalReport evaluate(const Predictor& predictor, const Dataset& test,
                    const std::vector<std::pair<std::string, Dataset>>& ood_sets,
                    std::size_t ece_bins = kDefaultEceBins);

}  // namespace s2d

#endif  // S2D_EVALUATION_H_
