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
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "oracles.h"
#include "s2d/errors.h"
#include "s2d/random.h"

namespace s2d {
namespace {

std::vector<CategoricalDist> draw(const std::vector<double>& alpha, int n,
                                  std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::vector<CategoricalDist> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    auto p = sample_dirichlet(alpha, rng);
    out.emplace_back(std::move(p));
  }
  return out;
}

std::vector<double> random_alpha(std::mt19937_64& rng, int k, double lo,
                                 double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  std::vector<double> a(k);
  for (double& v : a) v = std::exp(u(rng));
  return a;
}

TEST(CategoricalDist, Validation) {
  EXPECT_THROW(CategoricalDist({1.0}), ContractError);
  EXPECT_THROW(CategoricalDist({0.7, 0.7}), ContractError);
  EXPECT_THROW(CategoricalDist({1.2, -0.2}), ContractError);
  EXPECT_THROW(CategoricalDist({std::nan(""), 1.0}), ContractError);
  CategoricalDist certain({1.0, 0.0});
  EXPECT_EQ(certain[1], 0.0);
  EXPECT_EQ(certain.max(), 1.0);
  // Zero entries are floored where logs are taken.
  EXPECT_TRUE(std::isfinite(dir_log_pdf(DirichletParams({2.0, 2.0}), certain)));
  CategoricalDist slack({0.6000001, 0.4});
  EXPECT_NEAR(slack[0] + slack[1], 1.0, 1e-15);
}

TEST(CategoricalDist, ArgmaxPrefersLowestIndex) {
  CategoricalDist p({0.4, 0.4, 0.2});
  EXPECT_EQ(p.argmax(), 0u);
  EXPECT_DOUBLE_EQ(p.max(), 0.4);
}

TEST(DirichletParams, ClampsAndCachesSum) {
  DirichletParams d({2.0, 3.0, 5e4});
  EXPECT_EQ(d[2], kAlphaCap);
  EXPECT_DOUBLE_EQ(d.alpha0(), 5.0 + kAlphaCap);
  EXPECT_THROW(DirichletParams({1.0}), ContractError);
  EXPECT_THROW(DirichletParams({1.0, 0.0}), ContractError);
  EXPECT_THROW(DirichletParams({1.0, -2.0}), ContractError);
}

TEST(DirLogPdf, Examples) {
  EXPECT_NEAR(dir_log_pdf(DirichletParams({1, 1}), CategoricalDist({0.3, 0.7})),
              0.0, 1e-14);
  EXPECT_NEAR(dir_log_pdf(DirichletParams({2, 2}), CategoricalDist({0.5, 0.5})),
              std::log(6.0 * 0.25), 1e-14);
  EXPECT_NEAR(dir_log_pdf(DirichletParams({2, 2}), CategoricalDist({0.9, 0.1})),
              std::log(6.0 * 0.09), 1e-14);
  EXPECT_NEAR(std::log(6.0 * 0.25), 0.4055, 1e-4);
  EXPECT_NEAR(std::log(6.0 * 0.09), -0.6162, 1e-4);
  EXPECT_THROW(
      dir_log_pdf(DirichletParams({1, 1, 1}), CategoricalDist({0.5, 0.5})),
      ContractError);
}

TEST(DirLogPdf, MatchesOracle) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto a = random_alpha(rng, 2 + i % 5, 0.2, 50.0);
    Rng r = make_rng(i);
    const auto pi = sample_dirichlet(std::vector<double>(a.size(), 2.0), r);
    const double want = oracle::dir_log_pdf(a, pi);
    EXPECT_NEAR(dir_log_pdf(DirichletParams(a), CategoricalDist(pi)), want,
                1e-10 * std::max(1.0, std::abs(want)));
  }
}

TEST(DirMean, Examples) {
  auto m = dir_mean(DirichletParams({2, 2}));
  EXPECT_DOUBLE_EQ(m[0], 0.5);
  m = dir_mean(DirichletParams({1, 3}));
  EXPECT_DOUBLE_EQ(m[0], 0.25);
  EXPECT_DOUBLE_EQ(m[1], 0.75);
  m = dir_mean(DirichletParams({0.5, 0.5, 1.0}));
  EXPECT_DOUBLE_EQ(m[0], 0.25);
  EXPECT_DOUBLE_EQ(m[2], 0.5);
}

TEST(AlphaFromLogits, Examples) {
  auto a = alpha_from_logits(std::vector<double>{0.0, 0.0});
  EXPECT_DOUBLE_EQ(a[0], 1.0);
  EXPECT_DOUBLE_EQ(a[1], 1.0);
  a = alpha_from_logits(std::vector<double>{std::log(2.0), std::log(6.0)});
  EXPECT_NEAR(a[0], 2.0, 1e-14);
  EXPECT_NEAR(a[1], 6.0, 1e-14);
  a = alpha_from_logits(std::vector<double>{100.0, 0.0});
  EXPECT_EQ(a[0], kAlphaCap);
  a = alpha_from_logits(std::vector<double>{-100.0, 0.0});
  EXPECT_EQ(a[0], kAlphaMin);
}

TEST(AlphaFromLogits, MeanIsSoftmax) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> z(2 + i % 8);
    for (double& v : z) v = n(rng);
    // Only where no clamp triggers.
    const bool clamped = std::any_of(z.begin(), z.end(), [](double v) {
      return v <= std::log(kAlphaMin) || v >= std::log(kAlphaCap);
    });
    if (clamped) continue;
    const auto m = dir_mean(alpha_from_logits(z));
    double lse = -1e300;
    for (double v : z) lse = std::max(lse, v);
    double s = 0.0;
    for (double v : z) s += std::exp(v - lse);
    for (std::size_t c = 0; c < z.size(); ++c) {
      EXPECT_NEAR(m[c], std::exp(z[c] - lse) / s, 1e-12);
    }
  }
}

TEST(FitDirichletMle, SymmetricTwoPointProblem) {
  // The symmetric MLE solves 2ψ(2a) − 2ψ(a) = −ln(0.24).
  const double a = oracle::bisect(
      [](double x) {
        return 2 * oracle::digamma(2 * x) - 2 * oracle::digamma(x) +
               std::log(0.24);
      },
      1.0, 100.0);
  const std::vector<CategoricalDist> samples = {CategoricalDist({0.6, 0.4}),
                                                CategoricalDist({0.4, 0.6})};
  const DirichletFit fit = fit_dirichlet_mle(samples);
  EXPECT_FALSE(fit.saturated);
  EXPECT_NEAR(fit.alpha[0], a, 1e-6 * a);
  EXPECT_NEAR(fit.alpha[1], a, 1e-6 * a);
  EXPECT_NEAR(a, 12.5, 0.1);
}

TEST(FitDirichletMle, RecoversGenerator) {
  const std::vector<double> truth = {3.0, 7.0};
  const auto samples = draw(truth, 10000, 21);
  const DirichletFit fit = fit_dirichlet_mle(samples);
  EXPECT_FALSE(fit.saturated);
  for (std::size_t c = 0; c < truth.size(); ++c) {
    EXPECT_NEAR(fit.alpha[c], truth[c], 0.05 * truth[c]);
  }
  for (double g : dirichlet_log_likelihood_gradient(fit.alpha, samples)) {
    EXPECT_LT(std::abs(g), 1e-5);
  }
}

TEST(FitDirichletMle, ZeroVarianceSaturates) {
  const std::vector<CategoricalDist> samples(4, CategoricalDist({0.5, 0.5}));
  const DirichletFit fit = fit_dirichlet_mle(samples);
  EXPECT_TRUE(fit.saturated);
  EXPECT_NEAR(fit.alpha.alpha0(), kAlphaCap, 1e-9);
  EXPECT_DOUBLE_EQ(fit.alpha[0], fit.alpha[1]);
}

TEST(FitDirichletMle, ConcentratedSamplesConvergeOrSaturate) {
  // Near-identical samples push α0 toward the cap.
  std::vector<CategoricalDist> samples;
  for (int m = 0; m < 5; ++m) {
    const double d = 1e-3 * (m - 2);
    samples.emplace_back(std::vector<double>{0.2 + d, 0.3 - d, 0.5});
  }
  const DirichletFit fit = fit_dirichlet_mle(samples);
  EXPECT_GT(fit.alpha.alpha0(), 1000.0);
  if (!fit.saturated) {
    for (double g : dirichlet_log_likelihood_gradient(fit.alpha, samples)) {
      EXPECT_LT(std::abs(g), 1e-5);
    }
  }
}

TEST(FitDirichletMle, Preconditions) {
  const std::vector<CategoricalDist> one = {CategoricalDist({0.5, 0.5})};
  EXPECT_THROW(fit_dirichlet_mle(one), ContractError);
  const std::vector<CategoricalDist> mixed = {CategoricalDist({0.5, 0.5}),
                                              CategoricalDist({0.2, 0.3, 0.5})};
  EXPECT_THROW(fit_dirichlet_mle(mixed), ContractError);
}

TEST(FitDirichletMle, NeverWorseThanMomentMatch) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 100; ++i) {
    const auto a = random_alpha(rng, 2 + i % 4, 0.3, 30.0);
    const auto samples = draw(a, 5 + i % 50, 100 + i);
    const DirichletFit fit = fit_dirichlet_mle(samples);
    const double ll_fit = dirichlet_mean_log_likelihood(fit.alpha, samples);
    const double ll_mm =
        dirichlet_mean_log_likelihood(dirichlet_moment_match(samples), samples);
    EXPECT_GE(ll_fit, ll_mm - 1e-12) << i;
  }
}

TEST(FitDirichletMle, LikelihoodGradientMatchesFiniteDifference) {
  const auto samples = draw({1.5, 0.7, 4.0}, 50, 31);
  DirichletParams d({2.0, 1.0, 3.0});
  const auto g = dirichlet_log_likelihood_gradient(d, samples);
  for (std::size_t c = 0; c < 3; ++c) {
    std::vector<double> up(d.alpha().begin(), d.alpha().end());
    std::vector<double> dn = up;
    up[c] += 1e-5;
    dn[c] -= 1e-5;
    const double fd = (dirichlet_mean_log_likelihood(DirichletParams(up), samples) -
                       dirichlet_mean_log_likelihood(DirichletParams(dn), samples)) /
                      2e-5;
    EXPECT_NEAR(g[c], fd, 1e-6);
  }
}

TEST(KlDirichlet, Examples) {
  EXPECT_NEAR(kl_dirichlet(DirichletParams({3, 4, 5}), DirichletParams({3, 4, 5})),
              0.0, 1e-14);
  const double pq = kl_dirichlet(DirichletParams({2, 2}), DirichletParams({1, 1}));
  const double qp = kl_dirichlet(DirichletParams({1, 1}), DirichletParams({2, 2}));
  EXPECT_NEAR(pq, oracle::kl_dirichlet({2, 2}, {1, 1}), 1e-10);
  EXPECT_NEAR(qp, oracle::kl_dirichlet({1, 1}, {2, 2}), 1e-10);
  EXPECT_NEAR(pq, 0.12509, 1e-5);
  // Closed form: 2 − ln 6. Also E_{π~U}[−ln(6π(1−π))].
  EXPECT_NEAR(qp, 2.0 - std::log(6.0), 1e-12);
  EXPECT_GT(std::abs(pq - qp), 1e-3);
  EXPECT_THROW(kl_dirichlet(DirichletParams({1, 1}), DirichletParams({1, 1, 1})),
               ContractError);
}

TEST(KlDirichlet, MonteCarloAgreement) {
  // E_p[ln p(π) − ln q(π)] by sampling from p.
  const std::vector<double> p = {2.0, 2.0};
  const std::vector<double> q = {1.0, 1.0};
  std::mt19937_64 rng(41);
  double sum = 0.0;
  double sum2 = 0.0;
  constexpr int kDraws = 200000;
  for (int i = 0; i < kDraws; ++i) {
    auto pi = oracle::sample_dirichlet(p, rng);
    const double v = oracle::dir_log_pdf(p, pi) - oracle::dir_log_pdf(q, pi);
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / kDraws;
  const double se = std::sqrt((sum2 / kDraws - mean * mean) / kDraws);
  EXPECT_NEAR(kl_dirichlet(DirichletParams(p), DirichletParams(q)), mean, 4 * se);
}

TEST(KlDirichlet, NonNegativeAndZeroOnlyAtEquality) {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 1000; ++i) {
    const int k = 2 + i % 6;
    const auto a = random_alpha(rng, k, 0.1, 100.0);
    const auto b = random_alpha(rng, k, 0.1, 100.0);
    const double kl = kl_dirichlet(DirichletParams(a), DirichletParams(b));
    EXPECT_GE(kl, -1e-10);
    EXPECT_GT(kl, 1e-10);
    EXPECT_NEAR(kl, oracle::kl_dirichlet(a, b), 1e-10 * std::max(1.0, kl));
    EXPECT_LT(std::abs(kl_dirichlet(DirichletParams(a), DirichletParams(a))),
              1e-10);
  }
}

TEST(DirUncertainties, UniformPrior) {
  const Uncertainties u = dir_uncertainties(DirichletParams({1, 1}));
  EXPECT_NEAR(u.total, std::log(2.0), 1e-14);
  // ψ(3) − ψ(2) = 1/2.
  EXPECT_NEAR(u.data, 0.5, 1e-14);
  EXPECT_NEAR(u.knowledge, std::log(2.0) - 0.5, 1e-14);
  EXPECT_NEAR(u.knowledge, 0.1931, 1e-4);
}

TEST(DirUncertainties, LimitsAndOrdering) {
  const Uncertainties sharp = dir_uncertainties(DirichletParams(std::vector<double>(4, 2500.0)));
  EXPECT_NEAR(sharp.total, std::log(4.0), 1e-12);
  EXPECT_LT(sharp.knowledge, 1e-3);

  const Uncertainties skewed = dir_uncertainties(DirichletParams({1000, 1}));
  EXPECT_LT(skewed.total, 0.01);
  EXPECT_LT(skewed.knowledge, skewed.total);
  EXPECT_LT(skewed.data, skewed.total);
}

TEST(DirUncertainties, DataTermMatchesMonteCarlo) {
  std::mt19937_64 rng(15);
  for (int i = 0; i < 5; ++i) {
    const auto a = random_alpha(rng, 2 + i, 0.5, 20.0);
    double sum = 0.0;
    double sum2 = 0.0;
    constexpr int kDraws = 100000;
    for (int s = 0; s < kDraws; ++s) {
      const double h = oracle::entropy(oracle::sample_dirichlet(a, rng));
      sum += h;
      sum2 += h * h;
    }
    const double mean = sum / kDraws;
    const double se = std::sqrt((sum2 / kDraws - mean * mean) / kDraws);
    EXPECT_NEAR(dir_uncertainties(DirichletParams(a)).data, mean, 4 * se);
  }
}

TEST(DirUncertainties, DecompositionIdentity) {
  std::mt19937_64 rng(16);
  for (int i = 0; i < 10000; ++i) {
    const auto a = random_alpha(rng, 2 + i % 9, 0.1, 100.0);
    const Uncertainties u = dir_uncertainties(DirichletParams(a));
    EXPECT_NEAR(u.total, u.data + u.knowledge, 1e-12);
    EXPECT_GE(u.data, -1e-12);
    EXPECT_GE(u.knowledge, -1e-12);
  }
}

TEST(DirConfidence, Examples) {
  EXPECT_DOUBLE_EQ(dir_confidence(DirichletParams({1, 1})), 0.5);
  EXPECT_DOUBLE_EQ(dir_confidence(DirichletParams({1, 3})), 0.75);
  EXPECT_DOUBLE_EQ(dir_confidence(DirichletParams({8, 1, 1})), 0.8);
}

TEST(SampleDirichlet, SmallConcentrationsStayOnSimplex) {
  Rng rng = make_rng(3);
  const std::vector<double> a = {0.01, 0.02, 0.05};
  for (int i = 0; i < 1000; ++i) {
    const auto p = sample_dirichlet(a, rng);
    double s = 0.0;
    for (double v : p) {
      ASSERT_TRUE(std::isfinite(v));
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

}  // namespace
}  // namespace s2d
