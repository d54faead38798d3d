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


#include "commands.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <optional>
#include <thread>

#include "s2d/checkpoint.h"
#include "s2d/data.h"
#include "s2d/errors.h"
#include "s2d/evaluation.h"
#include "s2d/random.h"

namespace s2d::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void write_json(const fs::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Runs fn(0..n-1), on separate threads when asked. The first failure is
// rethrown after all threads finish.
void run_indexed(std::size_t n, bool parallel,
                 const std::function<void(std::size_t)>& fn) {
  if (!parallel || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> threads;
  threads.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    threads.emplace_back([&, i] {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

Dataset load_split(const fs::path& path, Split split, const RunConfig& cfg) {
  if (!fs::exists(path)) throw IoError("missing data file " + path.string());
  Dataset d = load_csv(path, split, split == Split::kOod ? 0 : cfg.data.classes);
  if (d.dims() != cfg.data.dims) {
    throw ContractError(path.string() + " has " + std::to_string(d.dims()) +
                        " features, config says data.dims = " +
                        std::to_string(cfg.data.dims));
  }
  return d;
}

std::vector<NetworkParams> load_models(const Paths& paths) {
  std::vector<NetworkParams> out;
  for (const auto& p : paths) out.push_back(load_checkpoint(p));
  return out;
}

std::string seed_tag(std::uint64_t seed) { return "seed" + std::to_string(seed); }

json mean_two_std(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  return json{{"mean", mean}, {"two_std", 2.0 * sd}};
}

json aggregate(const std::vector<EvalReport>& reports) {
  auto collect = [&](auto get) {
    std::vector<double> v;
    for (const auto& r : reports) v.push_back(get(r));
    return mean_two_std(v);
  };
  json out{{"n", reports.size()},
           {"accuracy", collect([](const EvalReport& r) { return r.accuracy; })},
           {"nll", collect([](const EvalReport& r) { return r.nll; })},
           {"ece_percent", collect([](const EvalReport& r) { return r.ece; })}};
  json sets = json::object();
  for (std::size_t s = 0; s < reports.front().detection.size(); ++s) {
    json per_score = json::object();
    for (std::size_t k = 0; k < kAllScoreKinds.size(); ++k) {
      const std::string name = to_string(kAllScoreKinds[k]);
      if (!reports.front().detection[s].second[k]) {
        per_score[name] = nullptr;
        continue;
      }
      per_score[name] = {
          {"auroc", collect([&](const EvalReport& r) { return r.detection[s].second[k]->auroc; })},
          {"aupr", collect([&](const EvalReport& r) { return r.detection[s].second[k]->aupr; })}};
    }
    sets[reports.front().detection[s].first] = per_score;
  }
  out["ood"] = sets;
  return out;
}

// score,kind,is_ood rows for one OOD set, grouped by score kind.
std::string scores_csv(const std::vector<UncertaintyRecord>& id,
                       const std::vector<UncertaintyRecord>& ood) {
  std::string out = "score,kind,is_ood\n";
  for (ScoreKind kind : kAllScoreKinds) {
    const std::string name = to_string(kind);
    auto emit = [&](const UncertaintyRecord& r, const char* flag) {
      std::optional<double> v = r.score(kind);
      if (!v) return;
      // Histograms want the raw confidence, not the OOD-oriented negation.
      if (kind == ScoreKind::kConfidence) v = r.confidence;
      out += fmt(*v) + "," + name + "," + flag + "\n";
    };
    for (const auto& r : id) emit(r, "0");
    for (const auto& r : ood) emit(r, "1");
  }
  return out;
}

std::string histogram_csv(const std::vector<UncertaintyRecord>& id,
                          const std::vector<UncertaintyRecord>& ood, int bins) {
  std::string out = "kind,is_ood,bin_lo,bin_hi,count\n";
  for (ScoreKind kind : kAllScoreKinds) {
    auto value = [&](const UncertaintyRecord& r) -> std::optional<double> {
      if (kind == ScoreKind::kConfidence) return r.confidence;
      return r.score(kind);
    };
    if (!value(id.front())) continue;
    double lo = *value(id.front());
    double hi = lo;
    for (const auto* set : {&id, &ood}) {
      for (const auto& r : *set) {
        lo = std::min(lo, *value(r));
        hi = std::max(hi, *value(r));
      }
    }
    if (!(hi > lo)) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double width = (hi - lo) / bins;
    for (int flag = 0; flag < 2; ++flag) {
      std::vector<long> counts(static_cast<std::size_t>(bins), 0);
      for (const auto& r : flag ? ood : id) {
        auto b = static_cast<long>(std::floor((*value(r) - lo) / width));
        counts[static_cast<std::size_t>(std::clamp(b, 0L, static_cast<long>(bins) - 1))]++;
      }
      for (int b = 0; b < bins; ++b) {
        out += to_string(kind) + "," + std::to_string(flag) + "," +
               fmt(lo + b * width) + "," + fmt(lo + (b + 1) * width) + "," +
               std::to_string(counts[static_cast<std::size_t>(b)]) + "\n";
      }
    }
  }
  return out;
}

Predictor make_predictor(const RunConfig& cfg, std::vector<NetworkParams> models,
                         std::uint64_t mc_seed) {
  const auto& ev = cfg.eval;
  if (ev.mc_dropout_passes > 0) {
    if (models.size() != 1) {
      throw ValidationError("eval.mc_dropout_passes needs a single model per predictor");
    }
    return Predictor::mc_dropout(std::move(models.front()),
                                 static_cast<std::size_t>(ev.mc_dropout_passes), mc_seed);
  }
  Predictor p = Predictor::from_models(std::move(models));
  p.set_gauss_sampling(static_cast<std::size_t>(ev.gauss_samples), ev.seed);
  return p;
}

}  // namespace

Paths cmd_gen_data(const RunConfig& cfg) {
  const DataSection& d = cfg.data;
  const std::uint64_t train_seed = derive_seed(d.seed, 0);
  const std::uint64_t test_seed = derive_seed(d.seed, 1);
  const std::uint64_t ring_seed = derive_seed(d.seed, 2);

  Dataset train;
  Dataset test;
  if (d.means.empty()) {
    train = gen_gaussian_mixture(d.classes, d.n_train_per_class, d.dims, d.overlap, train_seed);
    test = gen_gaussian_mixture(d.classes, d.n_test_per_class, d.dims, d.overlap, test_seed,
                                Split::kTest);
  } else {
    std::vector<Eigen::VectorXd> means;
    for (const auto& m : d.means) {
      means.push_back(Eigen::Map<const Eigen::VectorXd>(m.data(), d.dims));
    }
    train = gen_mixture(means, d.n_train_per_class, d.stddev, train_seed);
    test = gen_mixture(means, d.n_test_per_class, d.stddev, test_seed, Split::kTest);
  }

  Eigen::RowVectorXd center = train.features.colwise().mean();
  if (d.ood_center) {
    center = Eigen::Map<const Eigen::RowVectorXd>(d.ood_center->data(), d.dims);
  }
  Dataset around = train;
  around.features.rowwise() -= center;
  double id_radius = support_radius(around);
  around = test;
  around.features.rowwise() -= center;
  id_radius = std::max(id_radius, support_radius(around));
  Dataset ring = gen_ood_ring(d.ood_n, d.dims, d.ood_radius, ring_seed, id_radius);
  ring.features.rowwise() += center;

  json standardizer = nullptr;
  if (d.standardize) {
    const Standardizer s = Standardizer::fit(train);
    train = s.apply(train);
    test = s.apply(test);
    ring = s.apply(ring);
    standardizer = {{"mean", std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size())},
                    {"scale", std::vector<double>(s.scale.data(), s.scale.data() + s.scale.size())}};
  }

  const fs::path dir = cfg.data_dir();
  ensure_dir(dir);
  const Paths files = {dir / "train.csv", dir / "test.csv", dir / "ood_ring.csv",
                       dir / "manifest.json", dir / "config.json"};
  save_csv(train, files[0]);
  save_csv(test, files[1]);
  save_csv(ring, files[2]);
  json manifest{
      {"generator", d.means.empty() ? "circle" : "means"},
      {"seeds", {{"base", d.seed}, {"train", train_seed}, {"test", test_seed}, {"ood_ring", ring_seed}}},
      {"sizes", {{"train", train.size()}, {"test", test.size()}, {"ood_ring", ring.size()}}},
      {"classes", d.classes},
      {"dims", d.dims},
      {"ood_center_raw", std::vector<double>(center.data(), center.data() + center.size())},
      {"ood_radius_raw", d.ood_radius},
      {"id_support_radius_raw", id_radius},
      {"standardizer", standardizer},
      {"files", {"train.csv", "test.csv", "ood_ring.csv", "config.json"}}};
  write_json(files[3], manifest);
  write_json(files[4], to_json(cfg));
  return files;
}

Paths cmd_train(const RunConfig& cfg, bool parallel_members) {
  const Dataset train = load_split(cfg.train_csv(), Split::kTrain, cfg);
  const Dataset test = load_split(cfg.test_csv(), Split::kTest, cfg);
  const auto results = train_members(cfg.model.kind, train, &test, cfg.mlp_spec(), cfg.train,
                                     cfg.seeds, parallel_members);
  const fs::path dir = fs::path(cfg.output_dir) / "models";
  ensure_dir(dir);
  Paths files;
  const std::string kind = to_string(cfg.model.kind);
  for (std::size_t i = 0; i < results.size(); ++i) {
    const std::string stem = kind + "_" + seed_tag(cfg.seeds[i]);
    files.push_back(dir / (stem + ".json"));
    save_checkpoint(results[i].params, files.back());
    files.push_back(dir / (stem + ".jsonl"));
    write_text(files.back(), to_json_lines(results[i].log));
  }
  files.push_back(dir / "config.json");
  write_json(files.back(), to_json(cfg));
  return files;
}

Paths cmd_distill(const RunConfig& cfg, const Paths& teachers) {
  if (teachers.empty()) throw ValidationError("distill needs teacher checkpoints");
  const auto models = load_models(teachers);
  const Dataset train = load_split(cfg.train_csv(), Split::kTrain, cfg);
  const Dataset test = load_split(cfg.test_csv(), Split::kTest, cfg);
  std::vector<TrainResult> results;
  for (std::uint64_t seed : cfg.seeds) {
    ExperimentConfig c = cfg.train;
    c.seed = seed;
    results.push_back(distill(cfg.distill, models, train, &test, c));
  }
  const fs::path dir = fs::path(cfg.output_dir) / "distill";
  ensure_dir(dir);
  Paths files;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const std::string stem = to_string(cfg.distill) + "_" + seed_tag(cfg.seeds[i]);
    files.push_back(dir / (stem + ".json"));
    save_checkpoint(results[i].params, files.back());
    files.push_back(dir / (stem + ".jsonl"));
    write_text(files.back(), to_json_lines(results[i].log));
  }
  files.push_back(dir / "config.json");
  write_json(files.back(), to_json(cfg));
  return files;
}

Paths cmd_eval(const RunConfig& cfg, const Paths& checkpoints, bool parallel_members) {
  if (checkpoints.empty()) throw ValidationError("eval needs at least one checkpoint");
  if (cfg.eval.ensemble && cfg.eval.mc_dropout_passes > 0) {
    throw ValidationError("eval.ensemble and eval.mc_dropout_passes are exclusive");
  }
  auto models = load_models(checkpoints);
  const Dataset test = load_split(cfg.test_csv(), Split::kTest, cfg);
  std::vector<std::pair<std::string, Dataset>> ood_sets;
  ood_sets.emplace_back("ood_ring", load_split(cfg.ood_csv(), Split::kOod, cfg));
  for (const auto& s : cfg.eval.ood_sets) {
    ood_sets.emplace_back(s.name, load_split(s.path, Split::kOod, cfg));
  }

  struct Entry {
    std::string tag;
    std::vector<std::string> names;
    std::optional<Predictor> predictor;
    EvalReport report;
    std::vector<UncertaintyRecord> id;
    std::vector<std::vector<UncertaintyRecord>> ood;
  };
  std::vector<Entry> entries;
  if (cfg.eval.ensemble) {
    Entry e{"ensemble", {}, {}, {}, {}, {}};
    for (const auto& p : checkpoints) e.names.push_back(p.filename().string());
    e.predictor = make_predictor(cfg, std::move(models), 0);
    entries.push_back(std::move(e));
  } else {
    for (std::size_t i = 0; i < models.size(); ++i) {
      Entry e{"model" + std::to_string(i), {checkpoints[i].filename().string()}, {}, {}, {}, {}};
      e.predictor = make_predictor(cfg, {std::move(models[i])}, derive_seed(cfg.eval.seed, i));
      entries.push_back(std::move(e));
    }
  }
  const PredictorKind kind = entries.front().predictor->kind();
  for (const auto& e : entries) {
    if (e.predictor->kind() != kind) {
      throw ContractError("eval: checkpoints give different predictor kinds");
    }
  }

  run_indexed(entries.size(), parallel_members, [&](std::size_t i) {
    Entry& e = entries[i];
    e.report = evaluate(*e.predictor, test, ood_sets, static_cast<std::size_t>(cfg.eval.ece_bins));
    e.id = e.predictor->predict(test.features);
    for (const auto& [name, set] : ood_sets) e.ood.push_back(e.predictor->predict(set.features));
  });

  const fs::path dir = fs::path(cfg.output_dir) / "eval";
  ensure_dir(dir);
  Paths files;
  json results = json::array();
  std::vector<EvalReport> reports;
  for (const auto& e : entries) {
    results.push_back({{"tag", e.tag}, {"checkpoints", e.names}, {"report", e.report.to_json()}});
    reports.push_back(e.report);
    for (std::size_t s = 0; s < ood_sets.size(); ++s) {
      const std::string stem = e.tag + "_" + ood_sets[s].first;
      files.push_back(dir / ("scores_" + stem + ".csv"));
      write_text(files.back(), scores_csv(e.id, e.ood[s]));
      files.push_back(dir / ("histogram_" + stem + ".csv"));
      write_text(files.back(), histogram_csv(e.id, e.ood[s], cfg.eval.histogram_bins));
    }
  }
  json report{{"predictor", to_string(kind)}, {"results", results}};
  if (kind == PredictorKind::kGaussian) report["gauss_samples"] = cfg.eval.gauss_samples;
  if (kind == PredictorKind::kMcDropout) report["mc_dropout_passes"] = cfg.eval.mc_dropout_passes;
  report["aggregate"] = aggregate(reports);
  files.insert(files.begin(), dir / "report.json");
  write_json(files.front(), report);
  files.push_back(dir / "config.json");
  write_json(files.back(), to_json(cfg));
  return files;
}

json cmd_decompose(const RunConfig& cfg, const Paths& checkpoints,
                   const std::vector<double>& input) {
  if (checkpoints.empty()) throw ValidationError("decompose needs a checkpoint");
  const Predictor p = make_predictor(cfg, load_models(checkpoints), cfg.eval.seed);
  if (static_cast<Eigen::Index>(input.size()) != p.input_dim()) {
    throw ContractError("input has " + std::to_string(input.size()) +
                        " values, model expects " + std::to_string(p.input_dim()));
  }
  const Eigen::MatrixXd x =
      Eigen::Map<const Eigen::RowVectorXd>(input.data(), static_cast<Eigen::Index>(input.size()));
  json out = to_json(p.predict(x).front());
  out["predictor"] = to_string(p.kind());
  out["input"] = input;
  return out;
}

}  // namespace s2d::cli
