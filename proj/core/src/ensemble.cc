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

#include "s2d/ensemble.h"

#include <algorithm>

#include "s2d/errors.h"
#include "s2d/specfun.h"

namespace s2d {
namespace {

template <typename T>
void check_members(const std::vector<T>& members, const char* what) {
  if (members.empty()) {
    throw ContractError(std::string(what) + ": ensemble needs >= 1 member");
  }
  for (const auto& m : members) {
    if (m.size() != members.front().size()) {
      throw ContractError(std::string(what) + ": members differ in K");
    }
  }
}

// Sums in sorted order so that member order cannot change the result.
double order_free_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum;
}

PredictiveUncertainty summarize(std::vector<double> predictive, double data) {
  PredictiveUncertainty out;
  out.total = entropy(predictive);
  out.data = data;
  out.knowledge = out.total - out.data;
  out.confidence = *std::max_element(predictive.begin(), predictive.end());
  out.predictive = std::move(predictive);
  return out;
}

template <typename Ensemble, typename Fn>
std::vector<double> class_means(const Ensemble& e, Fn prob) {
  std::vector<double> mean(e.num_classes());
  std::vector<double> column(e.size());
  for (std::size_t c = 0; c < mean.size(); ++c) {
    for (std::size_t m = 0; m < e.size(); ++m) {
      column[m] = prob(e.members()[m], c);
    }
    mean[c] = order_free_sum(column) / static_cast<double>(e.size());
  }
  return mean;
}

std::vector<double> mean_of_members(const CategoricalEnsemble& e) {
  return class_means(e, [](const CategoricalDist& m, std::size_t c) {
    return m[c];
  });
}

std::vector<double> mean_of_means(const DirichletEnsemble& e) {
  return class_means(e, [](const DirichletParams& m, std::size_t c) {
    return m[c] / m.alpha0();
  });
}

}  // namespace

CategoricalEnsemble::CategoricalEnsemble(std::vector<CategoricalDist> members)
    : members_(std::move(members)) {
  check_members(members_, "CategoricalEnsemble");
}

DirichletEnsemble::DirichletEnsemble(std::vector<DirichletParams> members)
    : members_(std::move(members)) {
  check_members(members_, "DirichletEnsemble");
}

CategoricalDist cat_ensemble_predictive(const CategoricalEnsemble& e) {
  return CategoricalDist(mean_of_members(e));
}

PredictiveUncertainty cat_ensemble_uncertainties(const CategoricalEnsemble& e) {
  std::vector<double> entropies;
  for (const auto& m : e.members()) entropies.push_back(entropy(m.probs()));
  const double data =
      order_free_sum(std::move(entropies)) / static_cast<double>(e.size());
  return summarize(mean_of_members(e), data);
}

CategoricalDist dir_ensemble_predictive(const DirichletEnsemble& e) {
  return CategoricalDist(mean_of_means(e));
}

PredictiveUncertainty dir_ensemble_uncertainties(const DirichletEnsemble& e) {
  std::vector<double> entropies;
  for (const auto& m : e.members()) entropies.push_back(dir_expected_entropy(m));
  const double data =
      order_free_sum(std::move(entropies)) / static_cast<double>(e.size());
  return summarize(mean_of_means(e), data);
}

}  // namespace s2d
