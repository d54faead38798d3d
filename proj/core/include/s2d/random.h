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

#ifndef S2D_RANDOM_H_
#define S2D_RANDOM_H_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace s2d {

// Every stochastic component takes an explicitly seeded engine so that runs
// are reproducible from config + seed.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// Derives an independent stream seed from a base seed and a stream index
// (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

// One draw from Dir(alpha). Gamma variates are formed in log space so that
// concentrations far below one do not underflow to an all-zero vector.
std::vector<double> sample_dirichlet(std::span<const double> alpha, Rng& rng);

}  // namespace s2d

#endif  // S2D_RANDOM_H_
