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

#include <fstream>
#include <string>

#include "s2d/errors.h"

namespace s2d {
namespace {

using nlohmann::json;

std::string activation_name(Activation a) {
  return a == Activation::kRelu ? "relu" : "identity";
}

Activation activation_from(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "identity") return Activation::kIdentity;
  throw ContractError("checkpoint: unknown activation '" + s + "'");
}

json layer_to_json(const std::string& name, const DenseLayer& l) {
  std::vector<double> weight;
  weight.reserve(static_cast<std::size_t>(l.weight.size()));
  for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
    for (Eigen::Index c = 0; c < l.weight.cols(); ++c) {
      weight.push_back(l.weight(r, c));
    }
  }
  return json{{"name", name},
              {"rows", l.weight.rows()},
              {"cols", l.weight.cols()},
              {"weight", weight},
              {"bias", std::vector<double>(l.bias.data(),
                                           l.bias.data() + l.bias.size())},
              {"activation", activation_name(l.activation)},
              {"dropout", l.dropout}};
}

DenseLayer layer_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
  const auto r = j.at("rows").get<Eigen::Index>();
  const auto c = j.at("cols").get<Eigen::Index>();
  const auto weight = j.at("weight").get<std::vector<double>>();
  const auto bias = j.at("bias").get<std::vector<double>>();
  if (r != rows || c != cols ||
      static_cast<Eigen::Index>(weight.size()) != rows * cols ||
      static_cast<Eigen::Index>(bias.size()) != rows) {
    throw ContractError("checkpoint: layer '" +
                        j.value("name", std::string("?")) +
                        "' does not match the declared topology");
  }
  DenseLayer l;
  l.weight.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < cols; ++k) l.weight(i, k) = weight[i * cols + k];
  }
  l.bias = Eigen::Map<const Eigen::VectorXd>(bias.data(), rows);
  l.activation = activation_from(j.at("activation").get<std::string>());
  l.dropout = j.at("dropout").get<double>();
  return l;
}

}  // namespace

Topology Topology::of(const NetworkParams& p) {
  return Topology{p.wiring, static_cast<int>(p.input_dim()), p.hidden_sizes(),
                  static_cast<int>(p.num_classes())};
}

json topology_to_json(const Topology& t) {
  return json{{"wiring", to_string(t.wiring)},
              {"input_dim", t.input_dim},
              {"hidden", t.hidden},
              {"num_classes", t.num_classes}};
}

Topology topology_from_json(const json& j) {
  Topology t;
  t.wiring = head_wiring_from_string(j.at("wiring").get<std::string>());
  t.input_dim = j.at("input_dim").get<int>();
  t.hidden = j.at("hidden").get<std::vector<int>>();
  t.num_classes = j.at("num_classes").get<int>();
  return t;
}

json checkpoint_to_json(const NetworkParams& p) {
  p.validate();
  json layers = json::array();
  for (std::size_t i = 0; i < p.trunk.size(); ++i) {
    layers.push_back(layer_to_json("trunk" + std::to_string(i), p.trunk[i]));
  }
  layers.push_back(layer_to_json("head", p.head));
  if (p.sigma_head) layers.push_back(layer_to_json("sigma_head", *p.sigma_head));
  return json{{"format_version", kCheckpointFormatVersion},
              {"topology", topology_to_json(Topology::of(p))},
              {"head_wiring", to_string(p.wiring)},
              {"noise", {{"std_lo", p.noise.std_lo}, {"std_hi", p.noise.std_hi}}},
              {"seed", p.seed},
              {"layers", layers}};
}

NetworkParams checkpoint_from_json(const json& j,
                                   const std::optional<Topology>& expected) {
  try {
    if (j.at("format_version").get<int>() != kCheckpointFormatVersion) {
      throw ContractError("checkpoint: unsupported format_version");
    }
    const Topology t = topology_from_json(j.at("topology"));
    if (expected && !(*expected == t)) {
      throw ContractError("checkpoint: topology does not match the expected "
                          "network");
    }
    if (head_wiring_from_string(j.at("head_wiring").get<std::string>()) !=
        t.wiring) {
      throw ContractError("checkpoint: head_wiring disagrees with topology");
    }
    const json& layers = j.at("layers");
    const std::size_t expected_layers =
        t.hidden.size() + 1 + (t.wiring == HeadWiring::kGaussian ? 1 : 0);
    if (!layers.is_array() || layers.size() != expected_layers) {
      throw ContractError("checkpoint: layer count does not match topology");
    }
    NetworkParams p;
    int width = t.input_dim;
    for (std::size_t i = 0; i < t.hidden.size(); ++i) {
      p.trunk.push_back(layer_from_json(layers[i], t.hidden[i], width));
      width = t.hidden[i];
    }
    p.head = layer_from_json(layers[t.hidden.size()], t.num_classes, width);
    if (t.wiring == HeadWiring::kGaussian) {
      p.sigma_head = layer_from_json(layers.back(), t.num_classes, width);
    }
    p.wiring = t.wiring;
    p.noise.std_lo = j.at("noise").at("std_lo").get<double>();
    p.noise.std_hi = j.at("noise").at("std_hi").get<double>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.validate();
    return p;
  } catch (const json::exception& e) {
    throw ContractError(std::string("checkpoint: malformed document: ") +
                        e.what());
  }
}

void save_checkpoint(const NetworkParams& p, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(p).dump(1) << '\n';
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

NetworkParams load_checkpoint(const std::filesystem::path& path,
                              const std::optional<Topology>& expected) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read checkpoint " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ContractError("checkpoint " + path.string() + ": " + e.what());
  }
  return checkpoint_from_json(j, expected);
}

}  // namespace s2d
