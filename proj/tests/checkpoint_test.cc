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


#include "s2d/checkpoint.h"

#include <filesystem>
#include <fstream>

#include "gtest/gtest.h"
#include "s2d/errors.h"

namespace s2d {
namespace {

namespace fs = std::filesystem;

NetworkParams sample_network(HeadWiring wiring) {
  MlpSpec spec;
  spec.input_dim = 3;
  spec.hidden = {5, 4};
  spec.num_classes = 3;
  spec.wiring = wiring == HeadWiring::kGaussian ? HeadWiring::kSelfDistill : wiring;
  spec.dropout = 0.25;
  spec.noise = {0.1, 0.3};
  NetworkParams p = make_network(spec, 42);
  if (wiring == HeadWiring::kGaussian) attach_sigma_head(p, 0.7);
  p.seed = 17;
  return p;
}

void expect_same(const NetworkParams& a, const NetworkParams& b) {
  ASSERT_EQ(Topology::of(a), Topology::of(b));
  const auto la = a.layers();
  const auto lb = b.layers();
  ASSERT_EQ(la.size(), lb.size());
  for (std::size_t i = 0; i < la.size(); ++i) {
    EXPECT_EQ(la[i]->weight, lb[i]->weight);
    EXPECT_EQ(la[i]->bias, lb[i]->bias);
    EXPECT_EQ(la[i]->activation, lb[i]->activation);
    EXPECT_EQ(la[i]->dropout, lb[i]->dropout);
  }
  EXPECT_EQ(a.noise.std_lo, b.noise.std_lo);
  EXPECT_EQ(a.noise.std_hi, b.noise.std_hi);
  EXPECT_EQ(a.seed, b.seed);
}

class CheckpointFile : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("s2d_ckpt_" + std::string(::testing::UnitTest::GetInstance()
                                          ->current_test_info()
                                          ->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST(Checkpoint, JsonRoundTripIsExact) {
  for (auto w : {HeadWiring::kStandard, HeadWiring::kSelfDistill, HeadWiring::kGaussian}) {
    const NetworkParams p = sample_network(w);
    const NetworkParams back = checkpoint_from_json(checkpoint_to_json(p));
    expect_same(p, back);
    EXPECT_EQ(back.wiring, w);
  }
}

TEST(Checkpoint, DocumentShape) {
  const auto j = checkpoint_to_json(sample_network(HeadWiring::kGaussian));
  EXPECT_EQ(j.at("format_version"), kCheckpointFormatVersion);
  EXPECT_EQ(j.at("head_wiring"), "gaussian");
  ASSERT_EQ(j.at("layers").size(), 4u);
  EXPECT_EQ(j.at("layers")[0].at("name"), "trunk0");
  EXPECT_EQ(j.at("layers")[2].at("name"), "head");
  EXPECT_EQ(j.at("layers")[3].at("name"), "sigma_head");
  EXPECT_EQ(j.at("topology").at("hidden"), nlohmann::json({5, 4}));
}

TEST(Checkpoint, RejectsMismatches) {
  const NetworkParams p = sample_network(HeadWiring::kSelfDistill);
  const auto good = checkpoint_to_json(p);

  Topology other = Topology::of(p);
  other.hidden = {5, 5};
  EXPECT_THROW(checkpoint_from_json(good, other), ContractError);
  EXPECT_NO_THROW(checkpoint_from_json(good, Topology::of(p)));

  auto short_weight = good;
  short_weight["layers"][1]["weight"].erase(0);
  EXPECT_THROW(checkpoint_from_json(short_weight), ContractError);

  auto wrong_rows = good;
  wrong_rows["layers"][0]["rows"] = 6;
  EXPECT_THROW(checkpoint_from_json(wrong_rows), ContractError);

  auto missing_layer = good;
  missing_layer["layers"].erase(2);
  EXPECT_THROW(checkpoint_from_json(missing_layer), ContractError);

  auto wiring = good;
  wiring["head_wiring"] = "standard";
  EXPECT_THROW(checkpoint_from_json(wiring), ContractError);

  auto version = good;
  version["format_version"] = 2;
  EXPECT_THROW(checkpoint_from_json(version), ContractError);

  auto no_noise = good;
  no_noise.erase("noise");
  EXPECT_THROW(checkpoint_from_json(no_noise), ContractError);

  auto activation = good;
  activation["layers"][0]["activation"] = "tanh";
  EXPECT_THROW(checkpoint_from_json(activation), ContractError);
}

TEST_F(CheckpointFile, SaveLoad) {
  const NetworkParams p = sample_network(HeadWiring::kStandard);
  save_checkpoint(p, dir_ / "m.json");
  expect_same(p, load_checkpoint(dir_ / "m.json"));

  save_checkpoint(p, dir_ / "again.json");
  std::ifstream a(dir_ / "m.json"), b(dir_ / "again.json");
  const std::string sa((std::istreambuf_iterator<char>(a)), {});
  const std::string sb((std::istreambuf_iterator<char>(b)), {});
  EXPECT_EQ(sa, sb);

  EXPECT_THROW(load_checkpoint(dir_ / "absent.json"), IoError);
  std::ofstream(dir_ / "broken.json") << "{\"format_version\": 1,";
  EXPECT_THROW(load_checkpoint(dir_ / "broken.json"), ContractError);
  EXPECT_THROW(save_checkpoint(p, dir_ / "no_such_dir" / "m.json"), IoError);
}

}  // namespace
}  // namespace s2d
