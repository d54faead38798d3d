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

#ifndef S2D_GAUSSIAN_HEAD_H_
#define S2D_GAUSSIAN_HEAD_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "s2d/dirichlet.h"

namespace s2d {

inline constexpr double kSigmaMin = 1e-6;
inline constexpr double kSigmaMax = 1e3;
inline constexpr std::size_t kDefaultGaussSamples = 50;

// Diagonal Gaussian over log-concentrations z = ln α.
class DiagGaussian {
 public:
  // sigma is clamped into [kSigmaMin, kSigmaMax]. Throws ContractError on
  // mismatched or empty dimensions, non-finite entries or sigma <= 0.
  DiagGaussian(std::vector<double> mu, std::vector<double> sigma);

  std::size_t size() const { return mu_.size(); }
  std::span<const double> mu() const { return mu_; }
  std::span<const double> sigma() const { return sigma_; }

 private:
  std::vector<double> mu_;
  std::vector<double> sigma_;
};

struct ProxyGaussian {
  DiagGaussian gaussian;
  // Single member: sigma pinned at kSigmaMin.
  bool degenerate = false;
};

// Closed-form maximum-likelihood Gaussian over ln α^(m): mean and biased
// (divide-by-M) variance. Throws ContractError on an empty list or mixed K.
ProxyGaussian fit_proxy_gaussian(std::span<const DirichletParams> alphas);

// KL(p || q) for diagonal Gaussians. p is the proxy target, q the prediction.
double kl_diag_gaussian(const DiagGaussian& p, const DiagGaussian& q);

// n draws z ~ N(mu, diag(sigma^2)) mapped to α = exp(z) clamped into
// [kAlphaMin, kAlphaCap]. Throws ContractError when n == 0.
std::vector<DirichletParams> sample_dirichlets(const DiagGaussian& g,
                                               std::size_t n,
                                               std::uint64_t seed);

struct PredictiveUncertainty {
  std::vector<double> predictive;
  double total = 0.0;
  double data = 0.0;
  double knowledge = 0.0;
  double confidence = 0.0;
};

// Monte-Carlo decomposition: predictive = mean of sampled Dirichlet means,
// data = mean of sampled Dirichlet expected entropies.
PredictiveUncertainty gauss_uncertainties(
    const DiagGaussian& g, std::size_t n_samples = kDefaultGaussSamples,
    std::uint64_t seed = 0);

}  // namespace s2d

#endif  // S2D_GAUSSIAN_HEAD_H_
