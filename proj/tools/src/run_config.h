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


#ifndef S2D_TOOLS_RUN_CONFIG_H_
#define S2D_TOOLS_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "s2d/network.h"
#include "s2d/training.h"

namespace s2d::cli {

struct DataSection {
  int classes = 3;
  int dims = 2;
  // Used when `means` is empty: class means on a circle of radius
  // mixture_radius(overlap).
  double overlap = 0.5;
  // Explicit class means (classes x dims). Overrides the circle.
  std::vector<std::vector<double>> means;
  // Cluster std for explicit means; the circle layout always uses 1.
  double stddev = 1.0;
  int n_train_per_class = 50;
  int n_test_per_class = 200;
  int ood_n = 600;
  double ood_radius = 10.0;
  // Ring centre in raw feature space; defaults to the training centroid.
  std::optional<std::vector<double>> ood_center;
  bool standardize = true;
  std::uint64_t seed = 0;
  // Empty means <output_dir>/data/<name>.csv.
  std::string train_csv;
  std::string test_csv;
  std::string ood_csv;
};

struct ModelSection {
  ModelKind kind = ModelKind::kSelfDistill;
  std::vector<int> hidden = {64, 64};
  double dropout = 0.0;
  NoiseSpec noise;
};

struct NamedCsv {
  std::string name;
  std::string path;
};

struct EvalSection {
  // Evaluate all checkpoints as one ensemble instead of one report per
  // checkpoint.
  bool ensemble = false;
  // > 0 evaluates every checkpoint as an MC-dropout ensemble.
  int mc_dropout_passes = 0;
  int gauss_samples = 50;
  int ece_bins = 15;
  int histogram_bins = 20;
  std::uint64_t seed = 0;
  // Extra OOD sets besides the generated ring.
  std::vector<NamedCsv> ood_sets;
};

struct RunConfig {
  DataSection data;
  ModelSection model;
  ExperimentConfig train;
  DistillKind distill = DistillKind::kH2dDir;
  EvalSection eval;
  std::string output_dir = "s2d_out";
  std::vector<std::uint64_t> seeds = {0};

  std::filesystem::path data_dir() const;
  std::filesystem::path train_csv() const;
  std::filesystem::path test_csv() const;
  std::filesystem::path ood_csv() const;
  MlpSpec mlp_spec() const;
};

// Throws ValidationError on unknown keys, wrong types or values out of range.
RunConfig run_config_from_json(const nlohmann::json& j);
// Every field, defaults filled in.
nlohmann::json to_json(const RunConfig& c);

RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace s2d::cli

#endif  // S2D_TOOLS_RUN_CONFIG_H_
