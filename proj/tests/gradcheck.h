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


// Central finite-difference checks of network parameter gradients.

#ifndef S2D_TESTS_GRADCHECK_H_
#define S2D_TESTS_GRADCHECK_H_

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.h"
#include "s2d/autodiff.h"
#include "s2d/network.h"

namespace s2d::testing {

// Builds a scalar loss on `tape` from the bound network. Must be a pure
// function of the parameters: any randomness is re-seeded on every call.
using LossBuilder = std::function<ad::Var(ad::Tape&, const BoundNetwork&)>;

inline double loss_value(const NetworkParams& p, const LossBuilder& build) {
  ad::Tape tape;
  BoundNetwork net(tape, p, false);
  return build(tape, net).scalar();
}

struct GradCheckResult {
  double worst_relative_error = 0.0;
  std::string worst_location;
  int probes = 0;
};

// Compares backward() of `build` against (L(w + h) − L(w − h)) / 2h of
// `reference` at `probes` randomly chosen scalar parameters. `reference`
// differs from `build` only when part of the loss is detached and has to be
// frozen at its value at `params`.
inline GradCheckResult check_gradients(const NetworkParams& params,
                                       const LossBuilder& build,
                                       const LossBuilder& reference, int probes,
                                       std::uint64_t seed, double h = 1e-5) {
  ParamGrads analytic;
  {
    ad::Tape tape;
    BoundNetwork net(tape, params, true);
    tape.backward(build(tape, net));
    analytic = net.gradients();
  }
  GradCheckResult result;
  std::mt19937_64 rng(seed);
  const std::size_t layers = analytic.weight.size();
  for (int probe = 0; probe < probes; ++probe) {
    const std::size_t l = rng() % layers;
    const bool bias = rng() % 4 == 0;
    NetworkParams up = params;
    NetworkParams down = params;
    double* pu;
    double* pd;
    double grad;
    std::string where = "layer " + std::to_string(l);
    if (bias) {
      const Eigen::Index i = rng() % analytic.bias[l].size();
      pu = &up.layers()[l]->bias(i);
      pd = &down.layers()[l]->bias(i);
      grad = analytic.bias[l](i);
      where += " bias " + std::to_string(i);
    } else {
      const Eigen::Index r = rng() % analytic.weight[l].rows();
      const Eigen::Index c = rng() % analytic.weight[l].cols();
      pu = &up.layers()[l]->weight(r, c);
      pd = &down.layers()[l]->weight(r, c);
      grad = analytic.weight[l](r, c);
      where += " weight " + std::to_string(r) + "," + std::to_string(c);
    }
    *pu += h;
    *pd -= h;
    const double numeric =
        (loss_value(up, reference) - loss_value(down, reference)) / (2 * h);
    const double err = oracle::relative_error(grad, numeric);
    if (err > result.worst_relative_error) {
      result.worst_relative_error = err;
      result.worst_location = where + " analytic " + std::to_string(grad) +
                              " numeric " + std::to_string(numeric);
    }
    ++result.probes;
  }
  return result;
}

inline GradCheckResult check_gradients(const NetworkParams& params,
                                       const LossBuilder& build, int probes,
                                       std::uint64_t seed, double h = 1e-5) {
  return check_gradients(params, build, build, probes, seed, h);
}

}  // namespace s2d::testing

#endif  // S2D_TESTS_GRADCHECK_H_
