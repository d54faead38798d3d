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

#include "s2d/gaussian_head.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "s2d/errors.h"
#include "s2d/random.h"
#include "s2d/specfun.h"

namespace s2d {

DiagGaussian::DiagGaussian(std::vector<double> mu, std::vector<double> sigma)
    : mu_(std::move(mu)), sigma_(std::move(sigma)) {
  if (mu_.empty() || mu_.size() != sigma_.size()) {
    throw ContractError("DiagGaussian: mu and sigma must be non-empty and of "
                        "equal length");
  }
  for (std::size_t c = 0; c < mu_.size(); ++c) {
    if (!std::isfinite(mu_[c]) || !(sigma_[c] > 0.0) || std::isnan(sigma_[c])) {
      throw ContractError("DiagGaussian: mu must be finite and sigma positive");
    }
    sigma_[c] = std::clamp(sigma_[c], kSigmaMin, kSigmaMax);
  }
}

ProxyGaussian fit_proxy_gaussian(std::span<const DirichletParams> alphas) {
  if (alphas.empty()) throw ContractError("fit_proxy_gaussian: no members");
  const std::size_t k = alphas.front().size();
  for (const auto& a : alphas) {
    if (a.size() != k) {
      throw ContractError("fit_proxy_gaussian: members differ in class count");
    }
  }
  const double m = static_cast<double>(alphas.size());
  std::vector<double> mu(k, 0.0);
  for (const auto& a : alphas) {
    for (std::size_t c = 0; c < k; ++c) mu[c] += std::log(a[c]);
  }
  for (double& v : mu) v /= m;
  std::vector<double> sigma(k, 0.0);
  for (const auto& a : alphas) {
    for (std::size_t c = 0; c < k; ++c) {
      const double d = std::log(a[c]) - mu[c];
      sigma[c] += d * d;
    }
  }
  for (double& v : sigma) v = std::max(std::sqrt(v / m), kSigmaMin);
  return {DiagGaussian(std::move(mu), std::move(sigma)), alphas.size() == 1};
}

double kl_diag_gaussian(const DiagGaussian& p, const DiagGaussian& q) {
  if (p.size() != q.size()) {
    throw ContractError("kl_diag_gaussian: dimension mismatch");
  }
  double out = 0.0;
  for (std::size_t c = 0; c < p.size(); ++c) {
    const double sp = p.sigma()[c];
    const double sq = q.sigma()[c];
    const double dmu = q.mu()[c] - p.mu()[c];
    out += std::log(sq / sp) + (sp * sp + dmu * dmu) / (2.0 * sq * sq) - 0.5;
  }
  return out;
}

std::vector<DirichletParams> sample_dirichlets(const DiagGaussian& g,
                                               std::size_t n,
                                               std::uint64_t seed) {
  if (n == 0) throw ContractError("sample_dirichlets: n must be >= 1");
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<DirichletParams> out;
  out.reserve(n);
  std::vector<double> alpha(g.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < g.size(); ++c) {
      const double z = g.mu()[c] + g.sigma()[c] * normal(rng);
      alpha[c] = std::clamp(std::exp(z), kAlphaMin, kAlphaCap);
    }
    out.emplace_back(alpha);
  }
  return out;
}

PredictiveUncertainty gauss_uncertainties(const DiagGaussian& g,
                                          std::size_t n_samples,
                                          std::uint64_t seed) {
  const auto draws = sample_dirichlets(g, n_samples, seed);
  PredictiveUncertainty out;
  out.predictive.assign(g.size(), 0.0);
  for (const auto& d : draws) {
    for (std::size_t c = 0; c < g.size(); ++c) {
      out.predictive[c] += d[c] / d.alpha0();
    }
    out.data += dir_expected_entropy(d);
  }
  const double n = static_cast<double>(n_samples);
  for (double& v : out.predictive) v /= n;
  out.data /= n;
  out.total = entropy(out.predictive);
  out.knowledge = out.total - out.data;
  out.confidence =
      *std::max_element(out.predictive.begin(), out.predictive.end());
  return out;
}

}  // namespace s2d
