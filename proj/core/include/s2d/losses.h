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

#ifndef S2D_LOSSES_H_
#define S2D_LOSSES_H_

#include <Eigen/Dense>
#include <span>

#include "s2d/autodiff.h"

namespace s2d {

// All losses take B rows of logits (B x K) and return the mean over rows as a
// 1 x 1 tape node.

// Softmax cross-entropy against integer labels.
ad::Var loss_cross_entropy(ad::Var logits, std::span<const int> labels);

// -(1/M) Σ_m ln softmax(z^(m))[label] averaged over rows.
ad::Var loss_teacher(std::span<const ad::Var> teacher_logits,
                     std::span<const int> labels);

// α = clamp(exp(z), kAlphaMin, kAlphaCap), elementwise.
ad::Var student_alpha(ad::Var logits);

// ln α clamped to [ln kAlphaMin, ln kAlphaCap], the range teacher
// concentrations are held to.
ad::Var student_log_alpha(ad::Var logits);

// Row-wise KL(Dir(p) || Dir(q)) as a B x 1 node. Both sides may carry
// gradient.
ad::Var dirichlet_kl_rows(ad::Var p_alpha, ad::Var q_alpha);

// Row-wise KL(N(p_mu, p_sigma^2) || N(q_mu, q_sigma^2)) for diagonal
// Gaussians, B x 1.
ad::Var gaussian_kl_rows(ad::Var p_mu, ad::Var p_sigma, ad::Var q_mu,
                         ad::Var q_sigma);

struct ProxyBatch {
  Eigen::MatrixXd alpha;  // B x K
  int saturated = 0;      // rows whose fit hit the concentration cap
};

// Per-row maximum-likelihood Dirichlet over softmax(z^(m), t_proxy).
// Throws NumericError if a fit fails.
ProxyBatch fit_s2d_proxy(std::span<const Eigen::MatrixXd> teacher_logits,
                         double t_proxy);

// KL(Dir(target) || Dir(student_alpha(student_logits))) averaged over rows.
// `target_alpha` is taken by value and recorded as a constant.
ad::Var loss_dirichlet_target(const Eigen::MatrixXd& target_alpha,
                              ad::Var student_logits);

// Student loss: proxy fitted on detached, temperature-scaled teacher passes,
// then KL(proxy || student). Needs M >= 2.
ad::Var loss_student_s2d(std::span<const ad::Var> teacher_logits,
                         ad::Var student_logits, double t_proxy);

// loss_teacher + mu * loss_student_s2d. With mu == 0 the student term is not
// evaluated.
ad::Var loss_s2d_total(std::span<const ad::Var> teacher_logits,
                       ad::Var student_logits, std::span<const int> labels,
                       double mu, double t_proxy);

// Mean over members of softmax(z^(m) / T), B x K.
Eigen::MatrixXd temperature_predictive(
    std::span<const Eigen::MatrixXd> member_logits, double temperature);

// Cross-entropy of softmax(student / T) against a fixed predictive.
ad::Var loss_end(const Eigen::MatrixXd& teacher_predictive,
                 ad::Var student_logits, double t_end);

// (1/M) Σ_m KL(Dir(α^(m)) || Dir(student)), averaged over rows.
ad::Var loss_h2d_dir(std::span<const Eigen::MatrixXd> teacher_alpha,
                     ad::Var student_logits);

struct ProxyGaussianBatch {
  Eigen::MatrixXd mu;     // B x K
  Eigen::MatrixXd sigma;  // B x K
};

// Closed-form per-row Gaussian proxy over ln α^(m).
ProxyGaussianBatch fit_gaussian_proxy(
    std::span<const Eigen::MatrixXd> teacher_alpha);

// KL(N(proxy) || N(student_mu, student_sigma^2)) with the proxy detached.
// student_mu passes through student_log_alpha.
ad::Var loss_h2d_gauss(std::span<const Eigen::MatrixXd> teacher_alpha,
                       ad::Var student_mu, ad::Var student_sigma);

}  // namespace s2d

#endif  // S2D_LOSSES_H_
