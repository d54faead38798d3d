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

#include "s2d/training.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "s2d/errors.h"
#include "s2d/losses.h"
#include "s2d/metrics.h"
#include "s2d/specfun.h"

namespace s2d {
namespace {

using nlohmann::json;

// Stream indices for derive_seed, so each consumer draws independently.
enum Stream : std::uint64_t { kInitStream = 0, kShuffleStream = 1, kNoiseStream = 2 };

std::vector<CategoricalDist> softmax_rows(const Eigen::MatrixXd& logits) {
  std::vector<CategoricalDist> out;
  out.reserve(static_cast<std::size_t>(logits.rows()));
  std::vector<double> z(static_cast<std::size_t>(logits.cols()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    for (Eigen::Index c = 0; c < logits.cols(); ++c) z[c] = logits(i, c);
    out.emplace_back(softmax(z));
  }
  return out;
}

void score_epoch(EpochLog& entry, const NetworkParams& p, const Dataset* test) {
  if (test == nullptr) return;
  const Eigen::MatrixXd logits = p.wiring == HeadWiring::kGaussian
                                     ? forward_gaussian(p, test->features).mu
                                     : forward_deterministic(p, test->features);
  const auto preds = softmax_rows(logits);
  entry.test_acc = accuracy(preds, test->labels);
  entry.test_nll = nll(preds, test->labels);
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& m,
                        std::span<const std::size_t> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

// Shared SGD driver. `batch_loss` records the loss of one mini-batch on the
// tape and returns it.
template <typename BatchLoss>
std::vector<EpochLog> run_sgd(NetworkParams& params, std::size_t n_rows,
                              const Dataset* test, const ExperimentConfig& cfg,
                              bool distilling, BatchLoss batch_loss) {
  const int epochs = distilling ? cfg.distill_epochs : cfg.epochs;
  Rng shuffle_rng = make_rng(derive_seed(cfg.seed, kShuffleStream));
  Rng noise_rng = make_rng(derive_seed(cfg.seed, kNoiseStream));
  std::vector<std::size_t> order(n_rows);
  std::iota(order.begin(), order.end(), 0);
  SgdState state;
  std::vector<EpochLog> log;
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    SgdOptions options{cfg.rate_at(epoch, distilling), cfg.momentum,
                       cfg.weight_decay,
                       distilling ? cfg.distill_max_grad_norm : 0.0};
    double loss_sum = 0.0;
    int b = 0;
    for (std::size_t start = 0; start < n_rows; start += batch, ++b) {
      const std::size_t stop = std::min(n_rows, start + batch);
      const std::span<const std::size_t> rows(order.data() + start, stop - start);
      ad::Tape tape;
      BoundNetwork net(tape, params, true);
      const ad::Var loss = batch_loss(tape, net, rows, noise_rng);
      const double value = loss.scalar();
      if (!std::isfinite(value)) {
        throw NumericError("training diverged: non-finite loss at epoch " +
                           std::to_string(epoch) + ", batch " +
                           std::to_string(b));
      }
      tape.backward(loss);
      sgd_step(params, net.gradients(), state, options);
      loss_sum += value * static_cast<double>(rows.size());
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = loss_sum / static_cast<double>(n_rows);
    score_epoch(entry, params, test);
    log.push_back(entry);
  }
  return log;
}

void check_train_data(const Dataset& train, const MlpSpec& model) {
  train.validate();
  if (!train.labeled()) throw ContractError("training data must be labeled");
  if (train.dims() != model.input_dim) {
    throw ContractError("training data has " + std::to_string(train.dims()) +
                        " features, model expects " +
                        std::to_string(model.input_dim));
  }
  if (train.num_classes != model.num_classes) {
    throw ContractError("training data class count does not match the model");
  }
}

}  // namespace

std::string to_string(ModelKind kind) {
  return kind == ModelKind::kStandard ? "standard" : "s2d";
}

std::string to_string(DistillKind kind) {
  switch (kind) {
    case DistillKind::kEnd:
      return "end";
    case DistillKind::kH2dDir:
      return "h2d_dir";
    case DistillKind::kH2dGauss:
      return "h2d_gauss";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "standard") return ModelKind::kStandard;
  if (name == "s2d") return ModelKind::kSelfDistill;
  throw ValidationError("unknown model kind '" + name + "'");
}

DistillKind distill_kind_from_string(const std::string& name) {
  if (name == "end") return DistillKind::kEnd;
  if (name == "h2d_dir") return DistillKind::kH2dDir;
  if (name == "h2d_gauss") return DistillKind::kH2dGauss;
  throw ValidationError("unknown distillation kind '" + name + "'");
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw ValidationError(what); };
  if (!(mu >= 0.0)) fail("train.mu must be >= 0");
  if (!(t_proxy > 0.0)) fail("train.t_proxy must be > 0");
  if (m_teacher < 2) fail("train.m_teacher must be >= 2");
  if (m_ensemble < 1) fail("train.m_ensemble must be >= 1");
  if (!(t_end > 0.0)) fail("train.t_end must be > 0");
  if (!(learning_rate > 0.0)) fail("train.learning_rate must be > 0");
  if (!(distill_learning_rate > 0.0)) {
    fail("train.distill_learning_rate must be > 0");
  }
  if (!(lr_decay > 0.0)) fail("train.lr_decay must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    fail("train.momentum must lie in [0, 1)");
  }
  if (!(weight_decay >= 0.0)) fail("train.weight_decay must be >= 0");
  if (epochs < 1 || distill_epochs < 1) fail("epochs must be >= 1");
  if (batch_size < 1) fail("train.batch_size must be >= 1");
  if (!(distill_max_grad_norm >= 0.0)) {
    fail("train.distill_max_grad_norm must be >= 0");
  }
}

double ExperimentConfig::rate_at(int epoch, bool distilling) const {
  const auto& milestones = distilling ? distill_milestones : lr_milestones;
  double rate = distilling ? distill_learning_rate : learning_rate;
  for (int m : milestones) {
    if (epoch >= m) rate *= lr_decay;
  }
  return rate;
}

json to_json(const ExperimentConfig& c) {
  return json{{"mu", c.mu},
              {"t_proxy", c.t_proxy},
              {"m_teacher", c.m_teacher},
              {"m_ensemble", c.m_ensemble},
              {"t_end", c.t_end},
              {"learning_rate", c.learning_rate},
              {"lr_milestones", c.lr_milestones},
              {"lr_decay", c.lr_decay},
              {"momentum", c.momentum},
              {"weight_decay", c.weight_decay},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"seed", c.seed},
              {"distill_learning_rate", c.distill_learning_rate},
              {"distill_epochs", c.distill_epochs},
              {"distill_milestones", c.distill_milestones},
              {"distill_max_grad_norm", c.distill_max_grad_norm}};
}

ExperimentConfig experiment_config_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("train section must be an object");
  const json defaults = to_json(ExperimentConfig{});
  for (const auto& [key, value] : j.items()) {
    if (!defaults.contains(key)) {
      throw ValidationError("unknown key 'train." + key + "'");
    }
  }
  ExperimentConfig c;
  try {
    c.mu = j.value("mu", c.mu);
    c.t_proxy = j.value("t_proxy", c.t_proxy);
    c.m_teacher = j.value("m_teacher", c.m_teacher);
    c.m_ensemble = j.value("m_ensemble", c.m_ensemble);
    c.t_end = j.value("t_end", c.t_end);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.lr_milestones = j.value("lr_milestones", c.lr_milestones);
    c.lr_decay = j.value("lr_decay", c.lr_decay);
    c.momentum = j.value("momentum", c.momentum);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
    c.distill_learning_rate =
        j.value("distill_learning_rate", c.distill_learning_rate);
    c.distill_epochs = j.value("distill_epochs", c.distill_epochs);
    c.distill_milestones = j.value("distill_milestones", c.distill_milestones);
    c.distill_max_grad_norm =
        j.value("distill_max_grad_norm", c.distill_max_grad_norm);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("train section: ") + e.what());
  }
  c.validate();
  return c;
}

json to_json(const EpochLog& log) {
  json j{{"epoch", log.epoch}, {"train_loss", log.train_loss}};
  j["test_acc"] = log.test_acc ? json(*log.test_acc) : json(nullptr);
  j["test_nll"] = log.test_nll ? json(*log.test_nll) : json(nullptr);
  return j;
}

std::string to_json_lines(std::span<const EpochLog> log) {
  std::string out;
  for (const auto& entry : log) {
    out += to_json(entry).dump();
    out += '\n';
  }
  return out;
}

TrainResult train_model(ModelKind kind, const Dataset& train,
                        const Dataset* test, const MlpSpec& model,
                        const ExperimentConfig& cfg) {
  cfg.validate();
  check_train_data(train, model);
  MlpSpec spec = model;
  spec.wiring = kind == ModelKind::kStandard ? HeadWiring::kStandard
                                             : HeadWiring::kSelfDistill;
  TrainResult result{make_network(spec, derive_seed(cfg.seed, kInitStream)), {}};
  result.params.seed = cfg.seed;
  const bool dropout = result.params.has_dropout();

  auto batch_loss = [&](ad::Tape& tape, const BoundNetwork& net,
                        std::span<const std::size_t> rows, Rng& rng) {
    const ad::Var x = tape.constant(rows_of(train.features, rows));
    std::vector<int> labels;
    labels.reserve(rows.size());
    for (std::size_t r : rows) labels.push_back(train.labels[r]);
    const ad::Var features = net.trunk(x, dropout ? &rng : nullptr);
    if (kind == ModelKind::kStandard) {
      return loss_cross_entropy(net.head(features, dropout ? &rng : nullptr),
                                labels);
    }
    std::vector<ad::Var> teacher;
    teacher.reserve(static_cast<std::size_t>(cfg.m_teacher));
    for (int m = 0; m < cfg.m_teacher; ++m) {
      teacher.push_back(net.teacher_pass(features, net.params().noise, rng));
    }
    const ad::Var student = net.head(features);
    return loss_s2d_total(teacher, student, labels, cfg.mu, cfg.t_proxy);
  };
  result.log = run_sgd(result.params, train.size(), test, cfg, false, batch_loss);
  return result;
}

std::vector<TrainResult> train_members(ModelKind kind, const Dataset& train,
                                       const Dataset* test,
                                       const MlpSpec& model,
                                       const ExperimentConfig& cfg,
                                       std::span<const std::uint64_t> seeds,
                                       bool parallel) {
  cfg.validate();
  if (seeds.empty()) throw ContractError("train_members: empty seed list");
  const std::size_t m = seeds.size();
  std::vector<std::optional<TrainResult>> slots(m);
  auto run = [&](std::size_t i) {
    ExperimentConfig member = cfg;
    member.seed = seeds[i];
    slots[i] = train_model(kind, train, test, model, member);
  };
  if (parallel && m > 1) {
    std::vector<std::exception_ptr> errors(m);
    std::vector<std::thread> threads;
    threads.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
      threads.emplace_back([&, i] {
        try {
          run(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  } else {
    for (std::size_t i = 0; i < m; ++i) run(i);
  }
  std::vector<TrainResult> out;
  out.reserve(m);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::vector<TrainResult> train_deep_ensemble(ModelKind kind,
                                             const Dataset& train,
                                             const Dataset* test,
                                             const MlpSpec& model,
                                             const ExperimentConfig& cfg,
                                             bool parallel) {
  cfg.validate();
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(cfg.m_ensemble));
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = cfg.seed + i;
  return train_members(kind, train, test, model, cfg, seeds, parallel);
}

TrainResult distill(DistillKind kind, std::span<const NetworkParams> teachers,
                    const Dataset& train, const Dataset* test,
                    const ExperimentConfig& cfg) {
  cfg.validate();
  if (teachers.empty()) throw ContractError("distill: no teacher models");
  const auto& first = teachers.front();
  for (const auto& t : teachers) {
    t.validate();
    if (t.input_dim() != first.input_dim() ||
        t.num_classes() != first.num_classes()) {
      throw ContractError("distill: teachers disagree on input or class count");
    }
    if (t.wiring == HeadWiring::kGaussian) {
      throw ContractError("distill: Gaussian-head models cannot be teachers");
    }
    if (kind != DistillKind::kEnd && t.wiring != HeadWiring::kSelfDistill) {
      throw ContractError("distill: " + to_string(kind) +
                          " needs Dirichlet (s2d) teachers, got a " +
                          to_string(t.wiring) + " model");
    }
  }
  if (kind == DistillKind::kH2dGauss && teachers.size() < 2) {
    throw ContractError("distill: h2d_gauss needs at least 2 teachers");
  }
  train.validate();
  if (train.dims() != first.input_dim()) {
    throw ContractError("distill: data dimension does not match the teachers");
  }

  std::vector<Eigen::MatrixXd> teacher_logits;
  for (const auto& t : teachers) {
    teacher_logits.push_back(forward_deterministic(t, train.features));
  }

  TrainResult result{first, {}};
  Eigen::MatrixXd end_target;
  std::vector<Eigen::MatrixXd> teacher_alpha;
  ProxyGaussianBatch gauss_target;
  switch (kind) {
    case DistillKind::kEnd:
      result.params.wiring = HeadWiring::kStandard;
      end_target = temperature_predictive(teacher_logits, cfg.t_end);
      break;
    case DistillKind::kH2dDir:
    case DistillKind::kH2dGauss:
      for (const auto& z : teacher_logits) {
        teacher_alpha.push_back(z.array().exp().cwiseMax(kAlphaMin).cwiseMin(
            kAlphaCap));
      }
      if (kind == DistillKind::kH2dGauss) {
        gauss_target = fit_gaussian_proxy(teacher_alpha);
        // Start sigma at the proxy's typical spread per class; a far-off
        // start gives steep gradients that push sigma into its clamp.
        attach_sigma_head(result.params);
        result.params.sigma_head->bias =
            gauss_target.sigma.array().log().colwise().mean().transpose();
      }
      break;
  }
  result.params.seed = cfg.seed;

  auto batch_loss = [&](ad::Tape& tape, const BoundNetwork& net,
                        std::span<const std::size_t> rows, Rng&) {
    const ad::Var features = net.trunk(tape.constant(rows_of(train.features, rows)));
    const ad::Var logits = net.head(features);
    switch (kind) {
      case DistillKind::kEnd:
        return loss_end(rows_of(end_target, rows), logits, cfg.t_end);
      case DistillKind::kH2dDir: {
        std::vector<Eigen::MatrixXd> targets;
        for (const auto& a : teacher_alpha) targets.push_back(rows_of(a, rows));
        return loss_h2d_dir(targets, logits);
      }
      case DistillKind::kH2dGauss:
        break;
    }
    return ad::mean(gaussian_kl_rows(tape.constant(rows_of(gauss_target.mu, rows)),
                                     tape.constant(rows_of(gauss_target.sigma, rows)),
                                     student_log_alpha(logits), net.sigma(features)));
  };
  result.log = run_sgd(result.params, train.size(), test, cfg, true, batch_loss);
  return result;
}

}  // namespace s2d
