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

#ifndef S2D_ENSEMBLE_H_
#define S2D_ENSEMBLE_H_

#include <cstddef>
#include <span>
#include <vector>

#include "s2d/dirichlet.h"
#include "s2d/gaussian_head.h"

namespace s2d {

// M >= 1 categorical predictions over the same K classes.
class CategoricalEnsemble {
 public:
  explicit CategoricalEnsemble(std::vector<CategoricalDist> members);

  std::size_t size() const { return members_.size(); }
  std::size_t num_classes() const { return members_.front().size(); }
  std::span<const CategoricalDist> members() const { return members_; }

 private:
  std::vector<CategoricalDist> members_;
};

// M >= 1 Dirichlet predictions over the same K classes.
class DirichletEnsemble {
 public:
  explicit DirichletEnsemble(std::vector<DirichletParams> members);

  std::size_t size() const { return members_.size(); }
  std::size_t num_classes() const { return members_.front().size(); }
  std::span<const DirichletParams> members() const { return members_; }

 private:
  std::vector<DirichletParams> members_;
};

CategoricalDist cat_ensemble_predictive(const CategoricalEnsemble& e);

// total = H[mean], data = mean of member entropies, knowledge = total - data.
PredictiveUncertainty cat_ensemble_uncertainties(const CategoricalEnsemble& e);

CategoricalDist dir_ensemble_predictive(const DirichletEnsemble& e);

// total = H[mean of α/α0], data = mean of member expected entropies.
PredictiveUncertainty dir_ensemble_uncertainties(const DirichletEnsemble& e);

}  // namespace s2d

#endif  // S2D_ENSEMBLE_H_
