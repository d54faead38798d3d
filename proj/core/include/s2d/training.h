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

#ifndef S2D_TRAINING_H_
#define S2D_TRAINING_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "s2d/data.h"
#include "s2d/network.h"

namespace s2d {

enum class ModelKind { kStandard, kSelfDistill };
enum class DistillKind { kEnd, kH2dDir, kH2dGauss };

std::string to_string(ModelKind kind);
std::string to_string(DistillKind kind);
ModelKind model_kind_from_string(const std::string& name);
DistillKind distill_kind_from_string(const std::string& name);

struct ExperimentConfig {
  // Weight of the self-distillation student loss.
  double mu = 1.28e-4;
  // Temperature applied to teacher passes before fitting the proxy Dirichlet.
  double t_proxy = 1.5;
  // Stochastic teacher passes per step.
  int m_teacher = 5;
  int m_ensemble = 5;
  // Temperature of ensemble distillation (EnD).
  double t_end = 1.0;

  double learning_rate = 0.05;
  // Epochs (0-based) at which the rate is multiplied by lr_decay.
  std::vector<int> lr_milestones;
  double lr_decay = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  int epochs = 100;
  int batch_size = 64;
  std::uint64_t seed = 0;

  // Distillation runs at a reduced rate with its own schedule.
  double distill_learning_rate = 0.002;
  int distill_epochs = 50;
  std::vector<int> distill_milestones;
  // Global gradient-norm clip for distillation steps; 0 disables.
  double distill_max_grad_norm = 10.0;

  // Throws ValidationError.
  void validate() const;
  double rate_at(int epoch, bool distilling = false) const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
// Unknown keys are rejected with ValidationError; missing keys keep defaults.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  std::optional<double> test_acc;
  std::optional<double> test_nll;
};

nlohmann::json to_json(const EpochLog& log);
// One JSON object per line.
std::string to_json_lines(std::span<const EpochLog> log);

struct TrainResult {
  NetworkParams params;
  std::vector<EpochLog> log;
};

// Mini-batch SGD with momentum, full reshuffle per epoch, last partial batch
// kept. kStandard trains cross-entropy on the deterministic path; kSelfDistill
// trains loss_teacher + mu * loss_student on m_teacher noisy passes and the
// deterministic student path. `test` (optional) is scored after every epoch.
// Throws NumericError naming the epoch and batch if the loss diverges.
TrainResult train_model(ModelKind kind, const Dataset& train,
                        const Dataset* test, const MlpSpec& model,
                        const ExperimentConfig& cfg);

// One run per entry of `seeds` (cfg.seed is replaced). With `parallel`,
// members train on separate threads; results are identical either way.
std::vector<TrainResult> train_members(ModelKind kind, const Dataset& train,
                                       const Dataset* test,
                                       const MlpSpec& model,
                                       const ExperimentConfig& cfg,
                                       std::span<const std::uint64_t> seeds,
                                       bool parallel = false);

// m_ensemble independent runs with seeds seed + i. With `parallel`, members
// train on separate threads; results are identical either way.
std::vector<TrainResult> train_deep_ensemble(ModelKind kind,
                                             const Dataset& train,
                                             const Dataset* test,
                                             const MlpSpec& model,
                                             const ExperimentConfig& cfg,
                                             bool parallel = false);

// Student initialised from teachers[0]. kEnd fits the temperature-scaled
// ensemble average; kH2dDir the mean Dirichlet KL to every member; kH2dGauss
// adds a sigma head, started at the mean log proxy sigma of each class, and
// fits the closed-form Gaussian proxy over ln α.
// Throws ContractError on a kind/teacher mismatch.
TrainResult distill(DistillKind kind, std::span<const NetworkParams> teachers,
                    const Dataset& train, const Dataset* test,
                    const ExperimentConfig& cfg);

}  // namespace s2d

#endif  // S2D_TRAINING_H_
