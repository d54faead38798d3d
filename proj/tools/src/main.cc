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


// s2d: generate data, train, distill, evaluate and decompose uncertainty.
//
//   s2d gen-data --config run.json
//   s2d train    --config run.json [--parallel-members]
//   s2d distill  --config run.json teacher.json...
//   s2d eval     --config run.json model.json... [--parallel-members]
//   s2d decompose --config run.json model.json... --input 0.5,1.0
//
// Exit status: 0 on success, 2 on invalid configuration or arguments, 1 on
// any other failure.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.h"
#include "s2d/errors.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

void print_written(const s2d::cli::Paths& files) {
  for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-distribution distillation experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> checkpoints;
  std::vector<double> input;
  bool parallel = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Run configuration (JSON)")->required();
  };
  auto* gen = app.add_subcommand("gen-data", "Write train/test/OOD CSVs and a manifest");
  add_common(gen);
  auto* train = app.add_subcommand("train", "Train one model per configured seed");
  add_common(train);
  train->add_flag("--parallel-members", parallel, "Train seeds on separate threads");
  auto* dist = app.add_subcommand("distill", "Distill teacher checkpoints into a student");
  add_common(dist);
  dist->add_option("teachers", checkpoints, "Teacher checkpoints")->required();
  auto* eval = app.add_subcommand("eval", "Score checkpoints on ID and OOD data");
  add_common(eval);
  eval->add_option("checkpoints", checkpoints, "Checkpoints")->required();
  eval->add_flag("--parallel-members", parallel, "Evaluate models on separate threads");
  auto* dec = app.add_subcommand("decompose", "Uncertainty decomposition of one input");
  add_common(dec);
  dec->add_option("checkpoints", checkpoints, "Checkpoints (several form an ensemble)")
      ->required();
  dec->add_option("--input", input, "Comma-separated feature vector")
      ->required()
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    const s2d::cli::RunConfig cfg = s2d::cli::load_run_config(config_path);
    const s2d::cli::Paths paths(checkpoints.begin(), checkpoints.end());
    if (gen->parsed()) {
      print_written(s2d::cli::cmd_gen_data(cfg));
    } else if (train->parsed()) {
      print_written(s2d::cli::cmd_train(cfg, parallel));
    } else if (dist->parsed()) {
      print_written(s2d::cli::cmd_distill(cfg, paths));
    } else if (eval->parsed()) {
      print_written(s2d::cli::cmd_eval(cfg, paths, parallel));
    } else if (dec->parsed()) {
      std::cout << s2d::cli::cmd_decompose(cfg, paths, input).dump(2) << "\n";
    }
  } catch (const s2d::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const s2d::ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
