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


#include "run_config.h"

#include <fstream>
#include <set>

#include "s2d/errors.h"

namespace s2d::cli {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& section) {
  if (!j.is_object()) {
    throw ValidationError(section.empty() ? "config must be a JSON object"
                                          : section + " must be an object");
  }
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) {
      throw ValidationError("unknown key '" +
                            (section.empty() ? key : section + "." + key) + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& section) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(section + "." + key + " has the wrong type");
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

DataSection parse_data(const json& j) {
  reject_unknown(j,
                 {"classes", "dims", "overlap", "means", "stddev",
                  "n_train_per_class", "n_test_per_class", "ood_n",
                  "ood_radius", "ood_center", "standardize", "seed",
                  "train_csv", "test_csv", "ood_csv"},
                 "data");
  DataSection d;
  read(j, "classes", d.classes, "data");
  read(j, "dims", d.dims, "data");
  read(j, "overlap", d.overlap, "data");
  read(j, "means", d.means, "data");
  read(j, "stddev", d.stddev, "data");
  read(j, "n_train_per_class", d.n_train_per_class, "data");
  read(j, "n_test_per_class", d.n_test_per_class, "data");
  read(j, "ood_n", d.ood_n, "data");
  read(j, "ood_radius", d.ood_radius, "data");
  if (j.contains("ood_center") && !j.at("ood_center").is_null()) {
    std::vector<double> c;
    read(j, "ood_center", c, "data");
    d.ood_center = c;
  }
  read(j, "standardize", d.standardize, "data");
  read(j, "seed", d.seed, "data");
  read(j, "train_csv", d.train_csv, "data");
  read(j, "test_csv", d.test_csv, "data");
  read(j, "ood_csv", d.ood_csv, "data");

  require(d.classes >= 2, "data.classes must be >= 2");
  require(d.dims >= 2, "data.dims must be >= 2");
  require(d.overlap >= 0.0 && d.overlap <= 1.0, "data.overlap must lie in [0, 1]");
  if (!d.means.empty()) {
    require(static_cast<int>(d.means.size()) == d.classes,
            "data.means needs one row per class");
    for (const auto& m : d.means) {
      require(static_cast<int>(m.size()) == d.dims,
              "data.means rows need data.dims entries");
    }
  }
  require(d.stddev > 0.0, "data.stddev must be > 0");
  require(d.n_train_per_class >= 1 && d.n_test_per_class >= 1,
          "data sample counts must be >= 1");
  require(d.ood_n >= 1, "data.ood_n must be >= 1");
  require(d.ood_radius > 0.0, "data.ood_radius must be > 0");
  if (d.ood_center) {
    require(static_cast<int>(d.ood_center->size()) == d.dims,
            "data.ood_center needs data.dims entries");
  }
  return d;
}

ModelSection parse_model(const json& j) {
  reject_unknown(j, {"kind", "hidden", "dropout", "noise"}, "model");
  ModelSection m;
  std::string kind = to_string(m.kind);
  read(j, "kind", kind, "model");
  m.kind = model_kind_from_string(kind);
  read(j, "hidden", m.hidden, "model");
  read(j, "dropout", m.dropout, "model");
  if (j.contains("noise")) {
    const json& n = j.at("noise");
    reject_unknown(n, {"std_lo", "std_hi"}, "model.noise");
    read(n, "std_lo", m.noise.std_lo, "model.noise");
    read(n, "std_hi", m.noise.std_hi, "model.noise");
  }
  require(!m.hidden.empty(), "model.hidden must name at least one layer");
  for (int h : m.hidden) require(h >= 1, "model.hidden sizes must be >= 1");
  require(m.dropout >= 0.0 && m.dropout < 1.0, "model.dropout must lie in [0, 1)");
  try {
    m.noise.validate();
  } catch (const ContractError& e) {
    throw ValidationError(std::string("model.noise: ") + e.what());
  }
  return m;
}

EvalSection parse_eval(const json& j) {
  reject_unknown(j,
                 {"ensemble", "mc_dropout_passes", "gauss_samples", "ece_bins",
                  "histogram_bins", "seed", "ood_sets"},
                 "eval");
  EvalSection e;
  read(j, "ensemble", e.ensemble, "eval");
  read(j, "mc_dropout_passes", e.mc_dropout_passes, "eval");
  read(j, "gauss_samples", e.gauss_samples, "eval");
  read(j, "ece_bins", e.ece_bins, "eval");
  read(j, "histogram_bins", e.histogram_bins, "eval");
  read(j, "seed", e.seed, "eval");
  if (j.contains("ood_sets")) {
    require(j.at("ood_sets").is_array(), "eval.ood_sets must be an array");
    for (const auto& s : j.at("ood_sets")) {
      reject_unknown(s, {"name", "csv"}, "eval.ood_sets[]");
      NamedCsv n;
      read(s, "name", n.name, "eval.ood_sets[]");
      read(s, "csv", n.path, "eval.ood_sets[]");
      require(!n.name.empty() && !n.path.empty(),
              "eval.ood_sets entries need a name and a csv path");
      require(n.name != "ood_ring", "eval.ood_sets name 'ood_ring' is reserved");
      e.ood_sets.push_back(n);
    }
  }
  require(e.mc_dropout_passes >= 0, "eval.mc_dropout_passes must be >= 0");
  require(e.gauss_samples >= 1, "eval.gauss_samples must be >= 1");
  require(e.ece_bins >= 1, "eval.ece_bins must be >= 1");
  require(e.histogram_bins >= 1, "eval.histogram_bins must be >= 1");
  return e;
}

}  // namespace

std::filesystem::path RunConfig::data_dir() const {
  return std::filesystem::path(output_dir) / "data";
}

std::filesystem::path RunConfig::train_csv() const {
  return data.train_csv.empty() ? data_dir() / "train.csv" : std::filesystem::path(data.train_csv);
}

std::filesystem::path RunConfig::test_csv() const {
  return data.test_csv.empty() ? data_dir() / "test.csv" : std::filesystem::path(data.test_csv);
}

std::filesystem::path RunConfig::ood_csv() const {
  return data.ood_csv.empty() ? data_dir() / "ood_ring.csv" : std::filesystem::path(data.ood_csv);
}

MlpSpec RunConfig::mlp_spec() const {
  MlpSpec spec;
  spec.input_dim = data.dims;
  spec.hidden = model.hidden;
  spec.num_classes = data.classes;
  spec.dropout = model.dropout;
  spec.noise = model.noise;
  return spec;
}

RunConfig run_config_from_json(const json& j) {
  reject_unknown(j,
                 {"data", "model", "train", "distill", "eval", "output_dir",
                  "seeds"},
                 "");
  RunConfig c;
  if (j.contains("data")) c.data = parse_data(j.at("data"));
  if (j.contains("model")) c.model = parse_model(j.at("model"));
  if (j.contains("train")) c.train = experiment_config_from_json(j.at("train"));
  if (j.contains("distill")) {
    const json& d = j.at("distill");
    reject_unknown(d, {"kind"}, "distill");
    std::string kind = to_string(c.distill);
    read(d, "kind", kind, "distill");
    c.distill = distill_kind_from_string(kind);
  }
  if (j.contains("eval")) c.eval = parse_eval(j.at("eval"));
  read(j, "output_dir", c.output_dir, "config");
  read(j, "seeds", c.seeds, "config");
  require(!c.output_dir.empty(), "output_dir must not be empty");
  require(!c.seeds.empty(), "seeds must list at least one seed");
  require(std::set<std::uint64_t>(c.seeds.begin(), c.seeds.end()).size() ==
              c.seeds.size(),
          "seeds must be distinct");
  return c;
}

json to_json(const RunConfig& c) {
  json data{{"classes", c.data.classes},
            {"dims", c.data.dims},
            {"overlap", c.data.overlap},
            {"means", c.data.means},
            {"stddev", c.data.stddev},
            {"n_train_per_class", c.data.n_train_per_class},
            {"n_test_per_class", c.data.n_test_per_class},
            {"ood_n", c.data.ood_n},
            {"ood_radius", c.data.ood_radius},
            {"standardize", c.data.standardize},
            {"seed", c.data.seed},
            {"train_csv", c.data.train_csv},
            {"test_csv", c.data.test_csv},
            {"ood_csv", c.data.ood_csv}};
  data["ood_center"] = c.data.ood_center ? json(*c.data.ood_center) : json(nullptr);
  json ood_sets = json::array();
  for (const auto& s : c.eval.ood_sets) {
    ood_sets.push_back({{"name", s.name}, {"csv", s.path}});
  }
  return json{
      {"data", data},
      {"model",
       {{"kind", to_string(c.model.kind)},
        {"hidden", c.model.hidden},
        {"dropout", c.model.dropout},
        {"noise", {{"std_lo", c.model.noise.std_lo}, {"std_hi", c.model.noise.std_hi}}}}},
      {"train", s2d::to_json(c.train)},
      {"distill", {{"kind", to_string(c.distill)}}},
      {"eval",
       {{"ensemble", c.eval.ensemble},
        {"mc_dropout_passes", c.eval.mc_dropout_passes},
        {"gauss_samples", c.eval.gauss_samples},
        {"ece_bins", c.eval.ece_bins},
        {"histogram_bins", c.eval.histogram_bins},
        {"seed", c.eval.seed},
        {"ood_sets", ood_sets}}},
      {"output_dir", c.output_dir},
      {"seeds", c.seeds}};
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("config " + path.string() + " is not valid JSON: " +
                          e.what());
  }
  return run_config_from_json(j);
}

}  // namespace s2d::cli
