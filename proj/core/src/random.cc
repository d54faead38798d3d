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

#include "s2d/random.h"

#include <algorithm>
#include <cmath>

#include "s2d/errors.h"

namespace s2d {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<double> sample_dirichlet(std::span<const double> alpha, Rng& rng) {
  if (alpha.empty()) throw ContractError("sample_dirichlet: empty alpha");
  std::vector<double> log_gamma_draws(alpha.size());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t c = 0; c < alpha.size(); ++c) {
    const double a = alpha[c];
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw DomainError("sample_dirichlet: concentrations must be positive");
    }
    if (a >= 1.0) {
      std::gamma_distribution<double> gamma(a, 1.0);
      log_gamma_draws[c] = std::log(gamma(rng));
    } else {
      // G(a) = G(a + 1) * U^(1/a).
      std::gamma_distribution<double> gamma(a + 1.0, 1.0);
      const double g = gamma(rng);
      double u = unit(rng);
      while (u <= 0.0) u = unit(rng);
      log_gamma_draws[c] = std::log(g) + std::log(u) / a;
    }
  }
  const double top =
      *std::max_element(log_gamma_draws.begin(), log_gamma_draws.end());
  double sum = 0.0;
  for (double& v : log_gamma_draws) {
    v = std::exp(v - top);
    sum += v;
  }
  for (double& v : log_gamma_draws) v /= sum;
  return log_gamma_draws;
}

}  // namespace s2d
