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

#include "s2d/dirichlet.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "s2d/errors.h"
#include "s2d/specfun.h"

namespace s2d {
namespace {

constexpr int kMinkaMaxIterations = 1000;
constexpr double kMinkaTolerance = 1e-8;
// Plain fixed-point sweeps before switching to Newton steps.
constexpr int kFixedPointIterations = 20;
// Below this per-component variance the samples are treated as identical.
constexpr double kZeroVariance = 1e-24;

void check_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ContractError(std::string(what) + ": dimension mismatch (" +
                        std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

void check_samples(std::span<const CategoricalDist> samples, std::size_t min) {
  if (samples.size() < min) {
    throw ContractError("Dirichlet fit needs at least " + std::to_string(min) +
                        " samples");
  }
  for (const auto& s : samples) {
    check_same_size(s.size(), samples.front().size(), "Dirichlet fit");
  }
}

std::vector<double> mean_log_probs(std::span<const CategoricalDist> samples) {
  std::vector<double> out(samples.front().size(), 0.0);
  for (const auto& s : samples) {
    for (std::size_t c = 0; c < out.size(); ++c) {
      out[c] += std::log(std::max(s[c], kProbFloor));
    }
  }
  for (double& v : out) v /= static_cast<double>(samples.size());
  return out;
}

struct Moments {
  std::vector<double> mean;
  std::vector<double> second;
};

Moments sample_moments(std::span<const CategoricalDist> samples) {
  const std::size_t k = samples.front().size();
  Moments m{std::vector<double>(k, 0.0), std::vector<double>(k, 0.0)};
  for (const auto& s : samples) {
    for (std::size_t c = 0; c < k; ++c) {
      m.mean[c] += s[c];
      m.second[c] += s[c] * s[c];
    }
  }
  const double n = static_cast<double>(samples.size());
  for (std::size_t c = 0; c < k; ++c) {
    m.mean[c] /= n;
    m.second[c] /= n;
  }
  return m;
}

std::vector<double> scaled(const std::vector<double>& mean, double alpha0) {
  std::vector<double> out(mean);
  const double total = std::accumulate(mean.begin(), mean.end(), 0.0);
  for (double& v : out) v *= alpha0 / total;
  return out;
}

// Mean log-likelihood up to the constant -Σ mean ln π_c.
double mean_log_likelihood(std::span<const double> alpha,
                           std::span<const double> mean_log) {
  double alpha0 = 0.0;
  double out = 0.0;
  for (std::size_t c = 0; c < alpha.size(); ++c) {
    alpha0 += alpha[c];
    out += -log_gamma(alpha[c]) + alpha[c] * mean_log[c];
  }
  return out + log_gamma(alpha0);
}

// α_c <- ψ^{-1}(ψ(α0) + mean ln π_c).
void fixed_point_step(std::span<const double> alpha,
                      std::span<const double> mean_log,
                      std::vector<double>& next) {
  const double psi0 =
      digamma(std::accumulate(alpha.begin(), alpha.end(), 0.0));
  for (std::size_t c = 0; c < alpha.size(); ++c) {
    next[c] = inv_digamma(psi0 + mean_log[c], alpha[c]);
  }
}

// Newton step with the diagonal-plus-rank-one Hessian, halved until it stays
// positive and does not lower the likelihood. The fixed point contracts at a
// rate approaching one as α0 grows, so the fit switches to this after a few
// fixed-point sweeps.
void newton_step(std::span<const double> alpha, std::span<const double> mean_log,
                 std::vector<double>& next) {
  const std::size_t k = alpha.size();
  const double alpha0 = std::accumulate(alpha.begin(), alpha.end(), 0.0);
  const double psi0 = digamma(alpha0);
  const double z = trigamma(alpha0);
  std::vector<double> grad(k);
  std::vector<double> q(k);
  double sum_gq = 0.0;
  double sum_inv_q = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    grad[c] = psi0 - digamma(alpha[c]) + mean_log[c];
    q[c] = -trigamma(alpha[c]);
    sum_gq += grad[c] / q[c];
    sum_inv_q += 1.0 / q[c];
  }
  const double b = sum_gq / (1.0 / z + sum_inv_q);
  const double base = mean_log_likelihood(alpha, mean_log);
  for (double step = 1.0; step > 1e-12; step *= 0.5) {
    bool positive = true;
    for (std::size_t c = 0; c < k; ++c) {
      next[c] = alpha[c] - step * (grad[c] - b) / q[c];
      if (!(next[c] > 0.0)) positive = false;
    }
    if (positive && mean_log_likelihood(next, mean_log) >= base) return;
  }
  fixed_point_step(alpha, mean_log, next);
}

}  // namespace

CategoricalDist::CategoricalDist(std::vector<double> probs)
    : probs_(std::move(probs)) {
  if (probs_.size() < 2) {
    throw ContractError("CategoricalDist needs at least two classes");
  }
  double sum = 0.0;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0) {
      throw ContractError("CategoricalDist: entries must be finite and >= 0");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw ContractError("CategoricalDist: entries sum to " +
                        std::to_string(sum) + ", expected 1");
  }
  for (double& p : probs_) p /= sum;
}

std::size_t CategoricalDist::argmax() const {
  return static_cast<std::size_t>(
      std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
}

double CategoricalDist::max() const {
  return *std::max_element(probs_.begin(), probs_.end());
}

DirichletParams::DirichletParams(std::vector<double> alpha)
    : alpha_(std::move(alpha)) {
  if (alpha_.size() < 2) {
    throw ContractError("DirichletParams needs at least two classes");
  }
  for (double& a : alpha_) {
    if (!(a > 0.0) || std::isnan(a)) {
      throw ContractError("DirichletParams: concentrations must be positive");
    }
    a = std::clamp(a, kAlphaMin, kAlphaCap);
    alpha0_ += a;
  }
}

double dir_log_pdf(const DirichletParams& d, const CategoricalDist& pi) {
  check_same_size(d.size(), pi.size(), "dir_log_pdf");
  double out = log_gamma(d.alpha0());
  for (std::size_t c = 0; c < d.size(); ++c) {
    out += -log_gamma(d[c]) + (d[c] - 1.0) * std::log(std::max(pi[c], kProbFloor));
  }
  return out;
}

CategoricalDist dir_mean(const DirichletParams& d) {
  std::vector<double> probs(d.alpha().begin(), d.alpha().end());
  for (double& p : probs) p /= d.alpha0();
  return CategoricalDist(std::move(probs));
}

DirichletParams alpha_from_logits(std::span<const double> logits) {
  std::vector<double> alpha(logits.size());
  for (std::size_t c = 0; c < logits.size(); ++c) {
    if (std::isnan(logits[c])) {
      throw DomainError("alpha_from_logits: NaN logit");
    }
    alpha[c] = std::clamp(std::exp(logits[c]), kAlphaMin, kAlphaCap);
  }
  return DirichletParams(std::move(alpha));
}

DirichletParams dirichlet_moment_match(
    std::span<const CategoricalDist> samples) {
  check_samples(samples, 1);
  const Moments m = sample_moments(samples);
  double precision_sum = 0.0;
  int used = 0;
  for (std::size_t c = 0; c < m.mean.size(); ++c) {
    const double var = m.second[c] - m.mean[c] * m.mean[c];
    if (var > kZeroVariance) {
      precision_sum += (m.mean[c] - m.second[c]) / var;
      ++used;
    }
  }
  double alpha0 = used > 0 ? precision_sum / used : kAlphaCap;
  if (!std::isfinite(alpha0) || alpha0 <= 0.0) {
    alpha0 = static_cast<double>(m.mean.size());
  }
  alpha0 = std::min(alpha0, kAlphaCap);
  return DirichletParams(scaled(m.mean, alpha0));
}

DirichletFit fit_dirichlet_mle(std::span<const CategoricalDist> samples) {
  check_samples(samples, 2);
  const Moments m = sample_moments(samples);
  bool spread = false;
  for (std::size_t c = 0; c < m.mean.size(); ++c) {
    if (m.second[c] - m.mean[c] * m.mean[c] > kZeroVariance) spread = true;
  }
  if (!spread) {
    return {DirichletParams(scaled(m.mean, kAlphaCap)), true, 0};
  }

  const std::vector<double> mean_log = mean_log_probs(samples);
  const DirichletParams start = dirichlet_moment_match(samples);
  std::vector<double> alpha(start.alpha().begin(), start.alpha().end());
  std::vector<double> next(alpha.size());
  for (int it = 1; it <= kMinkaMaxIterations; ++it) {
    if (it <= kFixedPointIterations) {
      fixed_point_step(alpha, mean_log, next);
    } else {
      newton_step(alpha, mean_log, next);
    }
    double max_change = 0.0;
    for (std::size_t c = 0; c < alpha.size(); ++c) {
      max_change = std::max(max_change, std::abs(std::log(next[c] / alpha[c])));
    }
    alpha.swap(next);
    const double next0 = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    if (next0 > kAlphaCap) {
      return {DirichletParams(scaled(m.mean, kAlphaCap)), true, it};
    }
    if (max_change < kMinkaTolerance) {
      return {DirichletParams(alpha), false, it};
    }
  }
  throw NumericError("fit_dirichlet_mle: no convergence in " +
                         std::to_string(kMinkaMaxIterations) + " iterations",
                     alpha);
}

double dirichlet_mean_log_likelihood(const DirichletParams& d,
                                     std::span<const CategoricalDist> samples) {
  check_samples(samples, 1);
  check_same_size(d.size(), samples.front().size(), "log likelihood");
  const std::vector<double> mean_log = mean_log_probs(samples);
  double out = log_gamma(d.alpha0());
  for (std::size_t c = 0; c < d.size(); ++c) {
    out += -log_gamma(d[c]) + (d[c] - 1.0) * mean_log[c];
  }
  return out;
}

std::vector<double> dirichlet_log_likelihood_gradient(
    const DirichletParams& d, std::span<const CategoricalDist> samples) {
  check_samples(samples, 1);
  check_same_size(d.size(), samples.front().size(), "log likelihood");
  const std::vector<double> mean_log = mean_log_probs(samples);
  const double psi0 = digamma(d.alpha0());
  std::vector<double> grad(d.size());
  for (std::size_t c = 0; c < d.size(); ++c) {
    grad[c] = psi0 - digamma(d[c]) + mean_log[c];
  }
  return grad;
}

double kl_dirichlet(const DirichletParams& p, const DirichletParams& q) {
  check_same_size(p.size(), q.size(), "kl_dirichlet");
  const double psi0 = digamma(p.alpha0());
  double out = log_gamma(p.alpha0()) - log_gamma(q.alpha0());
  for (std::size_t c = 0; c < p.size(); ++c) {
    out += log_gamma(q[c]) - log_gamma(p[c]) +
           (p[c] - q[c]) * (digamma(p[c]) - psi0);
  }
  return out;
}

double dir_expected_entropy(const DirichletParams& d) {
  const double psi_total = digamma(d.alpha0() + 1.0);
  double out = 0.0;
  for (std::size_t c = 0; c < d.size(); ++c) {
    out += d[c] / d.alpha0() * (psi_total - digamma(d[c] + 1.0));
  }
  return out;
}

Uncertainties dir_uncertainties(const DirichletParams& d) {
  Uncertainties u;
  std::vector<double> mean(d.alpha().begin(), d.alpha().end());
  for (double& v : mean) v /= d.alpha0();
  u.total = entropy(mean);
  u.data = dir_expected_entropy(d);
  u.knowledge = u.total - u.data;
  return u;
}

double dir_confidence(const DirichletParams& d) {
  return *std::max_element(d.alpha().begin(), d.alpha().end()) / d.alpha0();
}

}  // namespace s2d
