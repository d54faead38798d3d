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

#ifndef S2D_SPECFUN_H_
#define S2D_SPECFUN_H_

#include <span>
#include <vector>

namespace s2d {

inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

// ln Γ(x) for x > 0. Throws DomainError otherwise.
double log_gamma(double x);

// ψ(x) = d/dx ln Γ(x) for x > 0.
double digamma(double x);

// ψ'(x) for x > 0. Needed for Newton steps and for differentiating digamma.
double trigamma(double x);

// Solves digamma(x) = y by Newton iteration. Throws NumericError when 50
// iterations are not enough.
double inv_digamma(double y);

// Same, but Newton starts from `initial_guess` (> 0). Used for warm starts
// inside fixed-point loops.
double inv_digamma(double y, double initial_guess);

// ln Σ exp(z_c) with max subtraction. Throws DomainError on empty input.
double log_sum_exp(std::span<const double> z);

// exp(z_c / T) / Σ exp(z_k / T). Throws DomainError on non-finite input or
// T <= 0.
std::vector<double> softmax(std::span<const double> z, double temperature = 1.0);

// log of softmax(z, T).
std::vector<double> log_softmax(std::span<const double> z,
                                double temperature = 1.0);

// Shannon entropy in nats; zero entries contribute zero.
double entropy(std::span<const double> probs);

}  // namespace s2d

#endif  // S2D_SPECFUN_H_
