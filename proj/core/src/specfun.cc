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

#include "s2d/specfun.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "s2d/errors.h"

namespace s2d {
namespace {

void check_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError(std::string(name) + ": argument must be positive and "
                      "finite, got " + std::to_string(x));
  }
}

// Stirling series, valid for x >= 15 to double precision.
double log_gamma_asymptotic(double x) {
  constexpr double kHalfLog2Pi = 0.91893853320467274178032973640562;
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv * (1.0 / 12.0 +
             inv2 * (-1.0 / 360.0 +
                     inv2 * (1.0 / 1260.0 +
                             inv2 * (-1.0 / 1680.0 +
                                     inv2 * (1.0 / 1188.0 +
                                             inv2 * (-691.0 / 360360.0 +
                                                     inv2 * (1.0 / 156.0)))))));
  return (x - 0.5) * std::log(x) - x + kHalfLog2Pi + series;
}

// zeta(k) - 1 for k = 2..kZetaTerms+1, via direct sum plus Euler-Maclaurin tail.
constexpr int kZetaTerms = 40;

const std::array<double, kZetaTerms>& zeta_minus_one() {
  static const std::array<double, kZetaTerms> table = [] {
    std::array<double, kZetaTerms> out{};
    constexpr int kCut = 100;
    for (int i = 0; i < kZetaTerms; ++i) {
      const double k = i + 2;
      double sum = 0.0;
      // Small terms first.
      for (int n = kCut - 1; n >= 2; --n) sum += std::pow(n, -k);
      const double n = kCut;
      sum += std::pow(n, 1.0 - k) / (k - 1.0) + 0.5 * std::pow(n, -k) +
             k * std::pow(n, -k - 1.0) / 12.0 -
             k * (k + 1.0) * (k + 2.0) * std::pow(n, -k - 3.0) / 720.0;
      out[i] = sum;
    }
    return out;
  }();
  return table;
}

// ln Γ(2 + e) for |e| <= 0.5 by its Taylor series around 2.
double log_gamma_near_two(double e) {
  const auto& zeta = zeta_minus_one();
  double sum = (1.0 - kEulerGamma) * e;
  double power = -e;
  for (int i = 0; i < kZetaTerms; ++i) {
    power *= -e;  // (-e)^(i + 2)
    const double term = zeta[i] * power / (i + 2);
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

double digamma_asymptotic(double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 -
                                      inv2 * (1.0 / 132.0 -
                                              inv2 * (691.0 / 32760.0 -
                                                      inv2 / 12.0))))));
  return std::log(x) - 0.5 * inv - series;
}

double trigamma_asymptotic(double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv * inv2 *
      (1.0 / 6.0 -
       inv2 * (1.0 / 30.0 -
               inv2 * (1.0 / 42.0 -
                       inv2 * (1.0 / 30.0 -
                               inv2 * (5.0 / 66.0 -
                                       inv2 * (691.0 / 2730.0 -
                                               inv2 * 7.0 / 6.0))))));
  return inv + 0.5 * inv2 + series;
}

constexpr double kShiftThreshold = 10.0;

void check_finite(std::span<const double> z, const char* name) {
  for (double v : z) {
    if (!std::isfinite(v)) {
      throw DomainError(std::string(name) + ": non-finite input");
    }
  }
}

}  // namespace

double log_gamma(double x) {
  check_positive(x, "log_gamma");
  if (x >= 15.0) return log_gamma_asymptotic(x);
  if (x >= 1.5 && x <= 2.5) return log_gamma_near_two(x - 2.0);
  if (x < 1.5) {
    // Γ(x) = Γ(x + 1) / x, stepping up until x + shift lands near 2.
    double shift_log = 0.0;
    double y = x;
    while (y < 1.5) {
      shift_log += std::log(y);
      y += 1.0;
    }
    if (y <= 2.5) return log_gamma_near_two(y - 2.0) - shift_log;
    return log_gamma(y) - shift_log;
  }
  // 2.5 < x < 15: Γ(x) = Γ(x + n) / (x (x+1) ... (x+n-1)).
  double product = 1.0;
  double y = x;
  while (y < 15.0) {
    product *= y;
    y += 1.0;
  }
  return log_gamma_asymptotic(y) - std::log(product);
}

double digamma(double x) {
  check_positive(x, "digamma");
  double shift = 0.0;
  while (x < kShiftThreshold) {
    shift += 1.0 / x;
    x += 1.0;
  }
  return digamma_asymptotic(x) - shift;
}

double trigamma(double x) {
  check_positive(x, "trigamma");
  double shift = 0.0;
  while (x < kShiftThreshold) {
    shift += 1.0 / (x * x);
    x += 1.0;
  }
  return trigamma_asymptotic(x) + shift;
}

double inv_digamma(double y) {
  if (!std::isfinite(y)) throw DomainError("inv_digamma: non-finite input");
  const double start = y >= -2.22 ? std::exp(y) + 0.5 : -1.0 / (y + kEulerGamma);
  return inv_digamma(y, start);
}

double inv_digamma(double y, double initial_guess) {
  if (!std::isfinite(y)) throw DomainError("inv_digamma: non-finite input");
  check_positive(initial_guess, "inv_digamma initial guess");
  constexpr int kMaxIterations = 50;
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  double x = initial_guess;
  for (int it = 0; it < kMaxIterations; ++it) {
    const double residual = digamma(x) - y;
    if (residual == 0.0) return x;
    double next = x - residual / trigamma(x);
    // ψ is increasing and concave, so an overshoot can only go below zero.
    if (!(next > 0.0)) next = 0.5 * x;
    const double step = std::abs(next - x);
    x = next;
    if (step <= 4.0 * kEps * x) return x;
  }
  if (std::abs(digamma(x) - y) <= 1e-12 * std::max(1.0, std::abs(y))) return x;
  throw NumericError("inv_digamma: no convergence after 50 Newton steps",
                     {x});
}

double log_sum_exp(std::span<const double> z) {
  if (z.empty()) throw DomainError("log_sum_exp: empty input");
  check_finite(z, "log_sum_exp");
  const double top = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - top);
  return top + std::log(sum);
}

std::vector<double> log_softmax(std::span<const double> z, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw DomainError("softmax: temperature must be positive and finite");
  }
  if (z.empty()) throw DomainError("softmax: empty input");
  check_finite(z, "softmax");
  std::vector<double> scaled(z.begin(), z.end());
  for (double& v : scaled) v /= temperature;
  const double norm = log_sum_exp(scaled);
  for (double& v : scaled) v -= norm;
  return scaled;
}

std::vector<double> softmax(std::span<const double> z, double temperature) {
  std::vector<double> out = log_softmax(z, temperature);
  double sum = 0.0;
  for (double& v : out) {
    v = std::exp(v);
    sum += v;
  }
  for (double& v : out) v /= sum;
  return out;
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

}  // namespace s2d
