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

#ifndef S2D_CHECKPOINT_H_
#define S2D_CHECKPOINT_H_

#include <filesystem>
#include <optional>
#include <vector>

#include "json.hpp"
#include "s2d/network.h"

namespace s2d {

inline constexpr int kCheckpointFormatVersion = 1;

// Shape of a network independent of its weights.
struct Topology {
  HeadWiring wiring = HeadWiring::kStandard;
  int input_dim = 0;
  std::vector<int> hidden;
  int num_classes = 0;

  static Topology of(const NetworkParams& p);
  bool operator==(const Topology&) const = default;
};

nlohmann::json topology_to_json(const Topology& t);
Topology topology_from_json(const nlohmann::json& j);

// {format_version, topology, layers: [{name, rows, cols, weight (row-major),
//  bias, activation, dropout}], noise, head_wiring, seed}
nlohmann::json checkpoint_to_json(const NetworkParams& p);

// Throws ContractError when the layer arrays disagree with the declared
// topology, or with `expected` when given.
NetworkParams checkpoint_from_json(const nlohmann::json& j,
                                   const std::optional<Topology>& expected = {});

void save_checkpoint(const NetworkParams& p, const std::filesystem::path& path);
NetworkParams load_checkpoint(const std::filesystem::path& path,
                              const std::optional<Topology>& expected = {});

}  // namespace s2d

#endif  // S2D_CHECKPOINT_H_
