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

#include "s2d/losses.h"

#include <cmath>
#include <vector>

#include "s2d/dirichlet.h"
#include "s2d/errors.h"
#include "s2d/gaussian_head.h"
#include "s2d/specfun.h"

namespace s2d {
namespace {

void check_members(std::size_t m, std::size_t min, const char* what) {
  if (m < min) {
    throw ContractError(std::string(what) + ": needs at least " +
                        std::to_string(min) + " teacher members");
  }
}

template <typename Mat>
void check_same_shape(std::span<const Mat> members, Eigen::Index rows,
                      Eigen::Index cols, const char* what) {
  for (const auto& m : members) {
    if (m.rows() != rows || m.cols() != cols) {
      throw ContractError(std::string(what) + ": teacher/student shape mismatch");
    }
  }
}

}  // namespace

ad::Var loss_cross_entropy(ad::Var logits, std::span<const int> labels) {
  return ad::neg(ad::mean(ad::pick(ad::log_softmax(logits), labels)));
}

ad::Var loss_teacher(std::span<const ad::Var> teacher_logits,
                     std::span<const int> labels) {
  check_members(teacher_logits.size(), 1, "loss_teacher");
  ad::Var total = ad::pick(ad::log_softmax(teacher_logits[0]), labels);
  for (std::size_t m = 1; m < teacher_logits.size(); ++m) {
    total = ad::add(total, ad::pick(ad::log_softmax(teacher_logits[m]), labels));
  }
  return ad::scale(ad::mean(total),
                   -1.0 / static_cast<double>(teacher_logits.size()));
}

ad::Var student_alpha(ad::Var logits) {
  return ad::clamp(ad::exp(logits), kAlphaMin, kAlphaCap);
}

ad::Var student_log_alpha(ad::Var logits) {
  return ad::clamp(logits, std::log(kAlphaMin), std::log(kAlphaCap));
}

ad::Var dirichlet_kl_rows(ad::Var p, ad::Var q) {
  const ad::Var p0 = ad::row_sum(p);
  const ad::Var q0 = ad::row_sum(q);
  const ad::Var psi_gap =
      ad::sub(ad::digamma(p), ad::broadcast_cols(ad::digamma(p0), p.cols()));
  const ad::Var per_class =
      ad::add(ad::sub(ad::lgamma(q), ad::lgamma(p)),
              ad::mul(ad::sub(p, q), psi_gap));
  return ad::add(ad::sub(ad::lgamma(p0), ad::lgamma(q0)), ad::row_sum(per_class));
}

ad::Var gaussian_kl_rows(ad::Var p_mu, ad::Var p_sigma, ad::Var q_mu,
                         ad::Var q_sigma) {
  const ad::Var log_ratio = ad::sub(ad::log(q_sigma), ad::log(p_sigma));
  const ad::Var spread = ad::add(ad::square(p_sigma), ad::square(ad::sub(q_mu, p_mu)));
  const ad::Var quad = ad::div(spread, ad::scale(ad::square(q_sigma), 2.0));
  return ad::row_sum(ad::add_scalar(ad::add(log_ratio, quad), -0.5));
}

ProxyBatch fit_s2d_proxy(std::span<const Eigen::MatrixXd> teacher_logits,
                         double t_proxy) {
  check_members(teacher_logits.size(), 2, "S2D proxy");
  const Eigen::Index rows = teacher_logits[0].rows();
  const Eigen::Index k = teacher_logits[0].cols();
  check_same_shape(teacher_logits, rows, k, "S2D proxy");
  ProxyBatch out{Eigen::MatrixXd(rows, k), 0};
  std::vector<CategoricalDist> samples;
  std::vector<double> z(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < rows; ++i) {
    samples.clear();
    for (const auto& m : teacher_logits) {
      for (Eigen::Index c = 0; c < k; ++c) z[c] = m(i, c);
      samples.emplace_back(softmax(z, t_proxy));
    }
    const DirichletFit fit = fit_dirichlet_mle(samples);
    if (fit.saturated) ++out.saturated;
    for (Eigen::Index c = 0; c < k; ++c) out.alpha(i, c) = fit.alpha[c];
  }
  return out;
}

ad::Var loss_dirichlet_target(const Eigen::MatrixXd& target_alpha,
                              ad::Var student_logits) {
  if (target_alpha.rows() != student_logits.rows() ||
      target_alpha.cols() != student_logits.cols()) {
    throw ContractError("Dirichlet target: shape mismatch with student");
  }
  ad::Tape& tape = student_logits.tape();
  return ad::mean(dirichlet_kl_rows(tape.constant(target_alpha),
                                    student_alpha(student_logits)));
}

ad::Var loss_student_s2d(std::span<const ad::Var> teacher_logits,
                         ad::Var student_logits, double t_proxy) {
  check_members(teacher_logits.size(), 2, "loss_student_s2d");
  std::vector<Eigen::MatrixXd> detached;
  detached.reserve(teacher_logits.size());
  for (const ad::Var& v : teacher_logits) detached.push_back(v.value());
  const ProxyBatch proxy = fit_s2d_proxy(detached, t_proxy);
  return loss_dirichlet_target(proxy.alpha, student_logits);
}

ad::Var loss_s2d_total(std::span<const ad::Var> teacher_logits,
                       ad::Var student_logits, std::span<const int> labels,
                       double mu, double t_proxy) {
  if (!(mu >= 0.0)) throw ContractError("loss_s2d_total: mu must be >= 0");
  const ad::Var teacher = loss_teacher(teacher_logits, labels);
  if (mu == 0.0) return teacher;
  return ad::add(teacher,
                 ad::scale(loss_student_s2d(teacher_logits, student_logits,
                                            t_proxy),
                           mu));
}

Eigen::MatrixXd temperature_predictive(
    std::span<const Eigen::MatrixXd> member_logits, double temperature) {
  check_members(member_logits.size(), 1, "temperature_predictive");
  if (!(temperature > 0.0)) {
    throw DomainError("temperature_predictive: temperature must be positive");
  }
  const Eigen::Index rows = member_logits[0].rows();
  const Eigen::Index k = member_logits[0].cols();
  check_same_shape(member_logits, rows, k, "temperature_predictive");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, k);
  std::vector<double> z(static_cast<std::size_t>(k));
  for (const auto& m : member_logits) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index c = 0; c < k; ++c) z[c] = m(i, c);
      const std::vector<double> p = softmax(z, temperature);
      for (Eigen::Index c = 0; c < k; ++c) out(i, c) += p[c];
    }
  }
  return out / static_cast<double>(member_logits.size());
}

ad::Var loss_end(const Eigen::MatrixXd& teacher_predictive,
                 ad::Var student_logits, double t_end) {
  if (teacher_predictive.rows() != student_logits.rows() ||
      teacher_predictive.cols() != student_logits.cols()) {
    throw ContractError("loss_end: shape mismatch with student");
  }
  ad::Tape& tape = student_logits.tape();
  const ad::Var log_probs = ad::log_softmax(student_logits, t_end);
  const ad::Var weighted = ad::mul(tape.constant(teacher_predictive), log_probs);
  return ad::neg(ad::mean(ad::row_sum(weighted)));
}

ad::Var loss_h2d_dir(std::span<const Eigen::MatrixXd> teacher_alpha,
                     ad::Var student_logits) {
  check_members(teacher_alpha.size(), 1, "loss_h2d_dir");
  check_same_shape(teacher_alpha, student_logits.rows(), student_logits.cols(),
                   "loss_h2d_dir");
  ad::Tape& tape = student_logits.tape();
  const ad::Var q = student_alpha(student_logits);
  ad::Var total = dirichlet_kl_rows(tape.constant(teacher_alpha[0]), q);
  for (std::size_t m = 1; m < teacher_alpha.size(); ++m) {
    total = ad::add(total, dirichlet_kl_rows(tape.constant(teacher_alpha[m]), q));
  }
  return ad::scale(ad::mean(total),
                   1.0 / static_cast<double>(teacher_alpha.size()));
}

ProxyGaussianBatch fit_gaussian_proxy(
    std::span<const Eigen::MatrixXd> teacher_alpha) {
  check_members(teacher_alpha.size(), 1, "Gaussian proxy");
  const Eigen::Index rows = teacher_alpha[0].rows();
  const Eigen::Index k = teacher_alpha[0].cols();
  check_same_shape(teacher_alpha, rows, k, "Gaussian proxy");
  ProxyGaussianBatch out{Eigen::MatrixXd(rows, k), Eigen::MatrixXd(rows, k)};
  std::vector<DirichletParams> members;
  std::vector<double> alpha(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < rows; ++i) {
    members.clear();
    for (const auto& m : teacher_alpha) {
      for (Eigen::Index c = 0; c < k; ++c) alpha[c] = m(i, c);
      members.emplace_back(alpha);
    }
    const ProxyGaussian proxy = fit_proxy_gaussian(members);
    for (Eigen::Index c = 0; c < k; ++c) {
      out.mu(i, c) = proxy.gaussian.mu()[c];
      out.sigma(i, c) = proxy.gaussian.sigma()[c];
    }
  }
  return out;
}

ad::Var loss_h2d_gauss(std::span<const Eigen::MatrixXd> teacher_alpha,
                       ad::Var student_mu, ad::Var student_sigma) {
  check_members(teacher_alpha.size(), 2, "loss_h2d_gauss");
  check_same_shape(teacher_alpha, student_mu.rows(), student_mu.cols(),
                   "loss_h2d_gauss");
  const ProxyGaussianBatch proxy = fit_gaussian_proxy(teacher_alpha);
  ad::Tape& tape = student_mu.tape();
  return ad::mean(gaussian_kl_rows(tape.constant(proxy.mu),
                                   tape.constant(proxy.sigma),
                                   student_log_alpha(student_mu), student_sigma));
}

}  // namespace s2d
