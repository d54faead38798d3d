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

#ifndef S2D_DIRICHLET_H_
#define S2D_DIRICHLET_H_

#include <cstddef>
#include <span>
#include <vector>

namespace s2d {

// Lower bound applied to categorical entries before taking logs.
inline constexpr double kProbFloor = 1e-8;
// Bounds on Dirichlet concentrations.
inline constexpr double kAlphaMin = 1e-8;
inline constexpr double kAlphaCap = 1e4;

// Probability vector on the simplex with K >= 2, renormalised on
// construction. Zero entries are allowed; log sites floor at kProbFloor.
class CategoricalDist {
 public:
  // Throws ContractError if K < 2, an entry is negative or non-finite, or the
  // entries do not sum to one within 1e-6.
  explicit CategoricalDist(std::vector<double> probs);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t c) const { return probs_[c]; }
  std::span<const double> probs() const { return probs_; }

  // Index of the largest probability, lowest index on ties.
  std::size_t argmax() const;
  double max() const;

 private:
  std::vector<double> probs_;
};

// Dirichlet concentrations α with cached α0 = Σ α_c. Concentrations are
// clamped into [kAlphaMin, kAlphaCap].
class DirichletParams {
 public:
  // Throws ContractError if K < 2 or an entry is non-positive or non-finite.
  explicit DirichletParams(std::vector<double> alpha);

  std::size_t size() const { return alpha_.size(); }
  double operator[](std::size_t c) const { return alpha_[c]; }
  std::span<const double> alpha() const { return alpha_; }
  double alpha0() const { return alpha0_; }

 private:
  std::vector<double> alpha_;
  double alpha0_ = 0.0;
};

// Total, data (expected entropy) and knowledge (mutual information)
// uncertainty, all in nats.
struct Uncertainties {
  double total = 0.0;
  double data = 0.0;
  double knowledge = 0.0;
};

double dir_log_pdf(const DirichletParams& d, const CategoricalDist& pi);

CategoricalDist dir_mean(const DirichletParams& d);

// α_c = exp(z_c) clamped to [kAlphaMin, kAlphaCap].
DirichletParams alpha_from_logits(std::span<const double> logits);

struct DirichletFit {
  DirichletParams alpha;
  // True when the samples have (numerically) zero spread or the likelihood
  // keeps increasing past α0 = kAlphaCap; alpha is then the sample mean
  // scaled to α0 = kAlphaCap.
  bool saturated = false;
  int iterations = 0;
};

// Maximum-likelihood Dirichlet by Minka's fixed point
//   α_c <- ψ^{-1}(ψ(α0) + mean_m ln π_c^(m)),
// started from the moment-matching estimate. After 20 sweeps the update
// switches to guarded Newton steps. Stops when max_c |Δ ln α_c| < 1e-8
// (at most 1000 iterations). Throws NumericError with the last iterate on
// non-convergence.
DirichletFit fit_dirichlet_mle(std::span<const CategoricalDist> samples);

// Moment-matching estimate used to start the fixed point.
DirichletParams dirichlet_moment_match(std::span<const CategoricalDist> samples);

// Mean per-sample log-likelihood and its gradient with respect to α.
double dirichlet_mean_log_likelihood(const DirichletParams& d,
                                     std::span<const CategoricalDist> samples);
std::vector<double> dirichlet_log_likelihood_gradient(
    const DirichletParams& d, std::span<const CategoricalDist> samples);

// KL(p || q).
double kl_dirichlet(const DirichletParams& p, const DirichletParams& q);

// Closed-form decomposition of the Dirichlet predictive:
//   total = H[α/α0], data = Σ_c (α_c/α0)(ψ(α0+1) − ψ(α_c+1)).
Uncertainties dir_uncertainties(const DirichletParams& d);

// Expected entropy of Cat(π) under π ~ Dir(α).
double dir_expected_entropy(const DirichletParams& d);

double dir_confidence(const DirichletParams& d);

}  // namespace s2d

#endif  // S2D_DIRICHLET_H_
