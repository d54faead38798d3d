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


#ifndef S2D_TOOLS_COMMANDS_H_
#define S2D_TOOLS_COMMANDS_H_

#include <filesystem>
#include <vector>

#include "json.hpp"
#include "run_config.h"

namespace s2d::cli {

using Paths = std::vector<std::filesystem::path>;

// Each command returns the files it wrote, in order.

// <output_dir>/data: train.csv, test.csv, ood_ring.csv, manifest.json and
// config.json.
Paths cmd_gen_data(const RunConfig& cfg);

// One checkpoint and JSON-lines log per seed under <output_dir>/models.
Paths cmd_train(const RunConfig& cfg, bool parallel_members);

// One student per seed under <output_dir>/distill.
Paths cmd_distill(const RunConfig& cfg, const Paths& teachers);

// report.json plus per-sample score and histogram CSVs under
// <output_dir>/eval.
Paths cmd_eval(const RunConfig& cfg, const Paths& checkpoints,
               bool parallel_members);

// Uncertainty record for one input. Several checkpoints form an ensemble.
nlohmann::json cmd_decompose(const RunConfig& cfg, const Paths& checkpoints,
                             const std::vector<double>& input);

}  // namespace s2d::cli

#endif  // S2D_TOOLS_COMMANDS_H_
