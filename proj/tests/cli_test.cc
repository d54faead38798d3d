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


// Drives the s2d binary end to end on a tiny configuration.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "commands.h"
#include "gtest/gtest.h"
#include "json.hpp"
#include "run_config.h"
#include "s2d/checkpoint.h"
#include "s2d/errors.h"

namespace s2d::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json tiny_config(const fs::path& out) {
  return json{
      {"data",
       {{"classes", 3},
        {"dims", 2},
        {"overlap", 0.3},
        {"n_train_per_class", 20},
        {"n_test_per_class", 20},
        {"ood_n", 30},
        {"ood_radius", 20.0},
        {"seed", 3}}},
      {"model", {{"kind", "s2d"}, {"hidden", {8}}}},
      {"train", {{"epochs", 4}, {"batch_size", 16}, {"distill_epochs", 3}}},
      {"eval", {{"gauss_samples", 10}, {"histogram_bins", 5}}},
      {"output_dir", out.string()},
      {"seeds", {0, 1}}};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("s2d_cli_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const json& j, const std::string& name = "run.json") {
    const fs::path p = dir_ / name;
    std::ofstream(p) << j.dump(2);
    return p;
  }

  // Exit status of the binary; stdout goes to `stdout_file`.
  int run(const std::string& args, const std::string& stdout_file = "stdout.txt") {
    const std::string cmd = std::string(S2D_CLI_PATH) + " " + args + " > " +
                            (dir_ / stdout_file).string() + " 2> " +
                            (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path dir_;
};

TEST(RunConfig, DefaultsRoundTrip) {
  const RunConfig c = run_config_from_json(json::object());
  EXPECT_EQ(to_json(run_config_from_json(to_json(c))), to_json(c));
  EXPECT_EQ(c.model.kind, ModelKind::kSelfDistill);
  EXPECT_EQ(c.train_csv(), fs::path("s2d_out") / "data" / "train.csv");
}

TEST(RunConfig, RejectsBadInput) {
  EXPECT_THROW(run_config_from_json({{"colour", 1}}), ValidationError);
  EXPECT_THROW(run_config_from_json({{"data", {{"overlap", 2.0}}}}), ValidationError);
  EXPECT_THROW(run_config_from_json({{"data", {{"classes", "three"}}}}), ValidationError);
  EXPECT_THROW(run_config_from_json({{"data", {{"means", {{0.0, 1.0}}}}}}), ValidationError);
  EXPECT_THROW(run_config_from_json({{"model", {{"kind", "deep"}}}}), ValidationError);
  EXPECT_THROW(run_config_from_json({{"model", {{"noise", {{"std_lo", 0.5}, {"std_hi", 0.1}}}}}}),
               ValidationError);
  EXPECT_THROW(run_config_from_json({{"model", {{"hidden", json::array()}}}}), ValidationError);
  EXPECT_THROW(run_config_from_json({{"train", {{"lr", 0.1}}}}), ValidationError);
  EXPECT_THROW(run_config_from_json({{"distill", {{"kind", "h2d"}}}}), ValidationError);
  EXPECT_THROW(run_config_from_json({{"eval", {{"gauss_samples", 0}}}}), ValidationError);
  EXPECT_THROW(run_config_from_json({{"seeds", {1, 1}}}), ValidationError);
  EXPECT_THROW(run_config_from_json({{"seeds", json::array()}}), ValidationError);
  EXPECT_THROW(run_config_from_json(json::array()), ValidationError);
}

TEST_F(CliTest, PipelineIsReproducible) {
  const fs::path out = dir_ / "out";
  const fs::path cfg = write_config(tiny_config(out));
  const std::string c = "--config " + cfg.string();

  ASSERT_EQ(run("gen-data " + c), 0);
  for (const char* f : {"train.csv", "test.csv", "ood_ring.csv", "manifest.json", "config.json"}) {
    EXPECT_TRUE(fs::exists(out / "data" / f)) << f;
  }
  EXPECT_EQ(std::distance(fs::directory_iterator(out / "data"), fs::directory_iterator()), 5);

  ASSERT_EQ(run("train " + c), 0);
  const fs::path m0 = out / "models" / "s2d_seed0.json";
  const fs::path m1 = out / "models" / "s2d_seed1.json";
  ASSERT_TRUE(fs::exists(m0));
  ASSERT_TRUE(fs::exists(out / "models" / "s2d_seed1.jsonl"));
  const std::string models = m0.string() + " " + m1.string();

  ASSERT_EQ(run("eval " + c + " " + models), 0);
  const json report = json::parse(slurp(out / "eval" / "report.json"));
  EXPECT_EQ(report.at("predictor"), "dirichlet");
  EXPECT_EQ(report.at("results").size(), 2u);
  EXPECT_EQ(report.at("aggregate").at("n"), 2);
  EXPECT_TRUE(report.at("aggregate").at("accuracy").contains("two_std"));
  for (const char* k : {"confidence", "total", "data", "knowledge"}) {
    EXPECT_FALSE(report.at("results")[0].at("report").at("ood").at("ood_ring").at(k).is_null());
  }
  const std::string scores = slurp(out / "eval" / "scores_model0_ood_ring.csv");
  EXPECT_EQ(scores.substr(0, scores.find('\n')), "score,kind,is_ood");
  EXPECT_TRUE(fs::exists(out / "eval" / "histogram_model1_ood_ring.csv"));

  ASSERT_EQ(run("decompose " + c + " " + m0.string() + " --input 0.5,-0.5", "dec1.json"), 0);
  const json record = json::parse(slurp(dir_ / "dec1.json"));
  EXPECT_NEAR(record.at("total").get<double>(),
              record.at("data").get<double>() + record.at("knowledge").get<double>(), 1e-12);

  // Snapshot every JSON artifact, rerun everything, compare bytes.
  std::vector<std::pair<fs::path, std::string>> snapshot;
  for (const auto& e : fs::recursive_directory_iterator(out)) {
    if (e.is_regular_file()) snapshot.emplace_back(e.path(), slurp(e.path()));
  }
  ASSERT_EQ(run("gen-data " + c), 0);
  ASSERT_EQ(run("train " + c + " --parallel-members"), 0);
  ASSERT_EQ(run("eval " + c + " " + models + " --parallel-members"), 0);
  ASSERT_EQ(run("decompose " + c + " " + m0.string() + " --input 0.5,-0.5", "dec2.json"), 0);
  for (const auto& [path, bytes] : snapshot) EXPECT_EQ(slurp(path), bytes) << path;
  EXPECT_EQ(slurp(dir_ / "dec1.json"), slurp(dir_ / "dec2.json"));
}

TEST_F(CliTest, DistillationKinds) {
  const fs::path out = dir_ / "out";
  json j = tiny_config(out);
  const fs::path cfg = write_config(j);
  ASSERT_EQ(run("gen-data --config " + cfg.string()), 0);
  ASSERT_EQ(run("train --config " + cfg.string()), 0);
  const std::string teachers = (out / "models" / "s2d_seed0.json").string() + " " +
                               (out / "models" / "s2d_seed1.json").string();

  j["distill"] = {{"kind", "h2d_gauss"}};
  j["seeds"] = {0};
  const fs::path gauss = write_config(j, "gauss.json");
  ASSERT_EQ(run("distill --config " + gauss.string() + " " + teachers), 0);
  const fs::path student = out / "distill" / "h2d_gauss_seed0.json";
  EXPECT_EQ(load_checkpoint(student).wiring, HeadWiring::kGaussian);
  ASSERT_EQ(run("decompose --config " + gauss.string() + " " + student.string() +
                    " --input 0,0",
                "dec.json"),
            0);
  EXPECT_EQ(json::parse(slurp(dir_ / "dec.json")).at("n_samples"), 10);

  // Standard teachers: EnD works, H2D-Dir is a contract error.
  j["model"]["kind"] = "standard";
  j["distill"] = {{"kind", "end"}};
  j["train"]["t_end"] = 3.0;
  const fs::path end = write_config(j, "end.json");
  ASSERT_EQ(run("train --config " + end.string()), 0);
  const fs::path std0 = out / "models" / "standard_seed0.json";
  ASSERT_EQ(run("distill --config " + end.string() + " " + std0.string()), 0);
  EXPECT_TRUE(fs::exists(out / "distill" / "end_seed0.json"));
  j["distill"] = {{"kind", "h2d_dir"}};
  const fs::path dir_cfg = write_config(j, "h2d.json");
  EXPECT_EQ(run("distill --config " + dir_cfg.string() + " " + std0.string()), 2);

  // Standard model: null data/knowledge detection fields.
  ASSERT_EQ(run("eval --config " + end.string() + " " + std0.string()), 0);
  const json report = json::parse(slurp(out / "eval" / "report.json"));
  const json& ring = report.at("results")[0].at("report").at("ood").at("ood_ring");
  EXPECT_TRUE(ring.at("data").is_null());
  EXPECT_TRUE(ring.at("knowledge").is_null());
  EXPECT_FALSE(ring.at("total").is_null());

  // Identical standard checkpoints: no disagreement, so no knowledge.
  ASSERT_EQ(run("decompose --config " + end.string() + " " + std0.string() + " " +
                    std0.string() + " --input 0.3,0.1",
                "same.json"),
            0);
  EXPECT_NEAR(json::parse(slurp(dir_ / "same.json")).at("knowledge").get<double>(), 0.0, 1e-12);
}

TEST_F(CliTest, ExitCodes) {
  const fs::path out = dir_ / "out";
  json bad = tiny_config(out);
  bad["data"]["overlap"] = 2;
  const fs::path bad_cfg = write_config(bad, "bad.json");
  EXPECT_EQ(run("gen-data --config " + bad_cfg.string()), 2);
  EXPECT_FALSE(fs::exists(out));

  const fs::path cfg = write_config(tiny_config(out));
  EXPECT_EQ(run("train --config " + cfg.string()), 1);  // no data yet
  EXPECT_FALSE(fs::exists(out / "models"));
  EXPECT_EQ(run("frobnicate --config " + cfg.string()), 2);
  EXPECT_EQ(run("gen-data"), 2);
  EXPECT_EQ(run("gen-data --config " + (dir_ / "absent.json").string()), 2);

  ASSERT_EQ(run("gen-data --config " + cfg.string()), 0);
  ASSERT_EQ(run("train --config " + cfg.string()), 0);
  const std::string m0 = (out / "models" / "s2d_seed0.json").string();
  EXPECT_EQ(run("decompose --config " + cfg.string() + " " + m0 + " --input 1,2,3"), 2);
  EXPECT_EQ(run("eval --config " + cfg.string() + " " + (dir_ / "none.json").string()), 1);
}

}  // namespace
}  // namespace s2d::cli
