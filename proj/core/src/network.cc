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

#include "s2d/network.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "s2d/errors.h"
#include "s2d/specfun.h"

namespace s2d {
namespace {

thread_local std::size_t g_layer_invocations = 0;

ad::Matrix as_row(std::span<const double> x) {
  ad::Matrix row(1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) row(0, i) = x[i];
  return row;
}

DenseLayer init_layer(int in, int out, Activation activation, double dropout,
                      double gain, Rng& rng) {
  DenseLayer layer;
  layer.weight.resize(out, in);
  std::normal_distribution<double> normal(0.0, std::sqrt(gain / in));
  for (Eigen::Index i = 0; i < layer.weight.size(); ++i) {
    layer.weight.data()[i] = normal(rng);
  }
  layer.bias = Eigen::VectorXd::Zero(out);
  layer.activation = activation;
  layer.dropout = dropout;
  return layer;
}

std::string layer_name(std::size_t index, const NetworkParams& p) {
  if (index < p.trunk.size()) return "trunk[" + std::to_string(index) + "]";
  if (index == p.trunk.size()) return "head";
  return "sigma_head";
}

}  // namespace

std::string to_string(HeadWiring wiring) {
  switch (wiring) {
    case HeadWiring::kStandard:
      return "standard";
    case HeadWiring::kSelfDistill:
      return "s2d";
    case HeadWiring::kGaussian:
      return "gaussian";
  }
  return "unknown";
}

HeadWiring head_wiring_from_string(const std::string& name) {
  if (name == "standard") return HeadWiring::kStandard;
  if (name == "s2d") return HeadWiring::kSelfDistill;
  if (name == "gaussian") return HeadWiring::kGaussian;
  throw ContractError("unknown head wiring '" + name + "'");
}

void NoiseSpec::validate() const {
  if (!(std_lo >= 0.0) || !(std_hi >= std_lo) || !std::isfinite(std_hi)) {
    throw ContractError("noise spec needs 0 <= std_lo <= std_hi");
  }
}

Eigen::Index NetworkParams::input_dim() const {
  return trunk.empty() ? head.in() : trunk.front().in();
}

Eigen::Index NetworkParams::feature_dim() const { return head.in(); }

std::vector<int> NetworkParams::hidden_sizes() const {
  std::vector<int> out;
  for (const auto& l : trunk) out.push_back(static_cast<int>(l.out()));
  return out;
}

bool NetworkParams::has_dropout() const {
  for (const DenseLayer* l : layers()) {
    if (l->dropout > 0.0) return true;
  }
  return false;
}

std::vector<const DenseLayer*> NetworkParams::layers() const {
  std::vector<const DenseLayer*> out;
  for (const auto& l : trunk) out.push_back(&l);
  out.push_back(&head);
  if (sigma_head) out.push_back(&*sigma_head);
  return out;
}

std::vector<DenseLayer*> NetworkParams::layers() {
  std::vector<DenseLayer*> out;
  for (auto& l : trunk) out.push_back(&l);
  out.push_back(&head);
  if (sigma_head) out.push_back(&*sigma_head);
  return out;
}

void NetworkParams::validate() const {
  Eigen::Index width = input_dim();
  const auto all = layers();
  for (std::size_t i = 0; i < all.size(); ++i) {
    const DenseLayer& l = *all[i];
    const bool is_sigma = sigma_head && i + 1 == all.size();
    const Eigen::Index expected_in = is_sigma ? head.in() : width;
    if (l.in() != expected_in || l.bias.size() != l.out() || l.out() == 0) {
      throw ContractError("network: layer " + layer_name(i, *this) +
                          " has incompatible dimensions");
    }
    if (!(l.dropout >= 0.0 && l.dropout < 1.0)) {
      throw ContractError("network: dropout rate must lie in [0, 1)");
    }
    if (!is_sigma) width = l.out();
  }
  if (head.out() < 2) throw ContractError("network: need at least 2 classes");
  if (sigma_head && sigma_head->out() != head.out()) {
    throw ContractError("network: sigma head must match the class count");
  }
  if (sigma_head.has_value() != (wiring == HeadWiring::kGaussian)) {
    throw ContractError("network: sigma head present iff wiring is gaussian");
  }
  noise.validate();
}

NetworkParams make_network(const MlpSpec& spec, std::uint64_t seed) {
  if (spec.input_dim < 1 || spec.num_classes < 2) {
    throw ContractError("make_network: need input_dim >= 1 and >= 2 classes");
  }
  Rng rng = make_rng(seed);
  NetworkParams p;
  int width = spec.input_dim;
  for (std::size_t i = 0; i < spec.hidden.size(); ++i) {
    if (spec.hidden[i] < 1) throw ContractError("make_network: empty layer");
    p.trunk.push_back(init_layer(width, spec.hidden[i], Activation::kRelu,
                                 i == 0 ? 0.0 : spec.dropout, 2.0, rng));
    width = spec.hidden[i];
  }
  p.head = init_layer(width, spec.num_classes, Activation::kIdentity,
                      spec.hidden.empty() ? 0.0 : spec.dropout, 1.0, rng);
  p.wiring = spec.wiring;
  p.noise = spec.noise;
  p.seed = seed;
  if (spec.wiring == HeadWiring::kGaussian) {
    p.wiring = HeadWiring::kSelfDistill;
    attach_sigma_head(p);
  }
  p.validate();
  return p;
}

void attach_sigma_head(NetworkParams& params, double initial_sigma) {
  DenseLayer sigma;
  sigma.weight = Eigen::MatrixXd::Zero(params.head.out(), params.head.in());
  sigma.bias =
      Eigen::VectorXd::Constant(params.head.out(), std::log(initial_sigma));
  sigma.activation = Activation::kIdentity;
  params.sigma_head = std::move(sigma);
  params.wiring = HeadWiring::kGaussian;
}

std::size_t layer_invocations() { return g_layer_invocations; }
void reset_layer_invocations() { g_layer_invocations = 0; }

BoundNetwork::BoundNetwork(ad::Tape& tape, const NetworkParams& params,
                           bool trainable)
    : tape_(tape), params_(params) {
  params.validate();
  auto bind = [&](const DenseLayer& l) {
    ad::Matrix bias = l.bias.transpose();
    if (trainable) {
      return BoundLayer{tape.variable(l.weight), tape.variable(std::move(bias)),
                        &l};
    }
    return BoundLayer{tape.constant(l.weight), tape.constant(std::move(bias)),
                      &l};
  };
  for (const auto& l : params.trunk) trunk_.push_back(bind(l));
  head_ = bind(params.head);
  if (params.sigma_head) sigma_head_ = bind(*params.sigma_head);
}

ad::Var BoundNetwork::apply(const BoundLayer& layer, ad::Var x,
                            Rng* dropout_rng) const {
  ++g_layer_invocations;
  if (dropout_rng != nullptr && layer.layer->dropout > 0.0) {
    const double rate = layer.layer->dropout;
    std::bernoulli_distribution keep(1.0 - rate);
    ad::Matrix mask(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < mask.size(); ++i) {
      mask.data()[i] = keep(*dropout_rng) ? 1.0 / (1.0 - rate) : 0.0;
    }
    x = ad::mul(x, tape_.constant(std::move(mask)));
  }
  ad::Var out = ad::linear(x, layer.weight, layer.bias);
  return layer.layer->activation == Activation::kRelu ? ad::relu(out) : out;
}

ad::Var BoundNetwork::trunk(ad::Var x, Rng* dropout_rng) const {
  if (x.cols() != params_.input_dim()) {
    throw ContractError("network input has " + std::to_string(x.cols()) +
                        " features, expected " +
                        std::to_string(params_.input_dim()));
  }
  for (const auto& layer : trunk_) x = apply(layer, x, dropout_rng);
  return x;
}

ad::Var BoundNetwork::head(ad::Var features, Rng* dropout_rng) const {
  return apply(head_, features, dropout_rng);
}

ad::Var BoundNetwork::teacher_pass(ad::Var features, const NoiseSpec& spec,
                                   Rng& rng) const {
  spec.validate();
  std::uniform_real_distribution<double> std_draw(spec.std_lo, spec.std_hi);
  std::normal_distribution<double> normal(0.0, 1.0);
  ad::Matrix mask(features.rows(), features.cols());
  for (Eigen::Index i = 0; i < mask.rows(); ++i) {
    const double s = spec.std_hi > spec.std_lo ? std_draw(rng) : spec.std_lo;
    for (Eigen::Index j = 0; j < mask.cols(); ++j) {
      mask(i, j) = 1.0 + s * normal(rng);
    }
  }
  return head(ad::mul(features, tape_.constant(std::move(mask))));
}

ad::Var BoundNetwork::sigma(ad::Var features) const {
  if (!sigma_head_) throw ContractError("network has no sigma head");
  return ad::clamp(ad::exp(apply(*sigma_head_, features, nullptr)), kSigmaMin,
                   kSigmaMax);
}

ParamGrads BoundNetwork::gradients() const {
  ParamGrads g;
  auto collect = [&](const BoundLayer& l) {
    g.weight.push_back(tape_.grad(l.weight));
    g.bias.push_back(tape_.grad(l.bias).row(0).transpose());
  };
  for (const auto& l : trunk_) collect(l);
  collect(head_);
  if (sigma_head_) collect(*sigma_head_);
  return g;
}

ParamGrads ParamGrads::zeros_like(const NetworkParams& p) {
  ParamGrads g;
  for (const DenseLayer* l : p.layers()) {
    g.weight.push_back(Eigen::MatrixXd::Zero(l->out(), l->in()));
    g.bias.push_back(Eigen::VectorXd::Zero(l->out()));
  }
  return g;
}

double ParamGrads::max_abs() const {
  double out = 0.0;
  for (const auto& w : weight) out = std::max(out, w.cwiseAbs().maxCoeff());
  for (const auto& b : bias) out = std::max(out, b.cwiseAbs().maxCoeff());
  return out;
}

Eigen::MatrixXd forward_deterministic(const NetworkParams& p,
                                      const Eigen::MatrixXd& x) {
  ad::Tape tape;
  BoundNetwork net(tape, p, false);
  return net.head(net.trunk(tape.constant(x))).value();
}

Eigen::VectorXd forward_deterministic(const NetworkParams& p,
                                      std::span<const double> x) {
  return forward_deterministic(p, as_row(x)).row(0).transpose();
}

std::vector<Eigen::VectorXd> forward_teacher_samples(const NetworkParams& p,
                                                     const NoiseSpec& spec,
                                                     std::span<const double> x,
                                                     std::size_t m,
                                                     std::uint64_t seed) {
  if (m == 0) throw ContractError("forward_teacher_samples: M must be >= 1");
  ad::Tape tape;
  BoundNetwork net(tape, p, false);
  const ad::Var features = net.trunk(tape.constant(as_row(x)));
  Rng rng = make_rng(seed);
  std::vector<Eigen::VectorXd> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    out.push_back(net.teacher_pass(features, spec, rng).value().row(0).transpose());
  }
  return out;
}

std::vector<CategoricalDist> forward_mc_dropout(const NetworkParams& p,
                                                std::span<const double> x,
                                                std::size_t m,
                                                std::uint64_t seed) {
  if (m == 0) throw ContractError("forward_mc_dropout: M must be >= 1");
  ad::Tape tape;
  BoundNetwork net(tape, p, false);
  const ad::Var input = tape.constant(as_row(x));
  Rng rng = make_rng(seed);
  std::vector<CategoricalDist> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const ad::Matrix logits = net.head(net.trunk(input, &rng), &rng).value();
    const std::vector<double> z(logits.data(), logits.data() + logits.size());
    out.emplace_back(softmax(z));
  }
  return out;
}

GaussianOutputs forward_gaussian(const NetworkParams& p,
                                 const Eigen::MatrixXd& x) {
  if (p.wiring != HeadWiring::kGaussian) {
    throw ContractError("forward_gaussian needs a gaussian-head network");
  }
  ad::Tape tape;
  BoundNetwork net(tape, p, false);
  const ad::Var features = net.trunk(tape.constant(x));
  return {net.head(features).value(), net.sigma(features).value()};
}

DiagGaussian forward_gaussian(const NetworkParams& p,
                              std::span<const double> x) {
  const GaussianOutputs out = forward_gaussian(p, as_row(x));
  std::vector<double> mu(out.mu.data(), out.mu.data() + out.mu.size());
  std::vector<double> sigma(out.sigma.data(),
                            out.sigma.data() + out.sigma.size());
  return DiagGaussian(std::move(mu), std::move(sigma));
}

void sgd_step(NetworkParams& p, const ParamGrads& grads, SgdState& state,
              const SgdOptions& options) {
  if (!(options.learning_rate > 0.0) || !(options.momentum >= 0.0) ||
      !(options.momentum < 1.0) || !(options.weight_decay >= 0.0) ||
      !(options.max_grad_norm >= 0.0)) {
    throw ContractError("sgd_step: need lr > 0, momentum in [0, 1), "
                        "weight_decay >= 0, max_grad_norm >= 0");
  }
  const auto layers = p.layers();
  if (grads.weight.size() != layers.size() ||
      grads.bias.size() != layers.size()) {
    throw ContractError("sgd_step: gradient does not match the network");
  }
  if (state.velocity.weight.size() != layers.size()) {
    state.velocity = ParamGrads::zeros_like(p);
  }
  double scale = 1.0;
  if (options.max_grad_norm > 0.0) {
    double sq = 0.0;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      sq += grads.weight[i].squaredNorm() + grads.bias[i].squaredNorm();
    }
    const double norm = std::sqrt(sq);
    if (norm > options.max_grad_norm) scale = options.max_grad_norm / norm;
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    DenseLayer& l = *layers[i];
    if (grads.weight[i].rows() != l.out() || grads.weight[i].cols() != l.in() ||
        grads.bias[i].size() != l.out()) {
      throw ContractError("sgd_step: gradient shape mismatch at " +
                          layer_name(i, p));
    }
    if (!grads.weight[i].allFinite()) {
      throw NumericError("sgd_step: non-finite gradient in " +
                         layer_name(i, p) + ".weight");
    }
    if (!grads.bias[i].allFinite()) {
      throw NumericError("sgd_step: non-finite gradient in " +
                         layer_name(i, p) + ".bias");
    }
    auto& vw = state.velocity.weight[i];
    auto& vb = state.velocity.bias[i];
    vw = options.momentum * vw + scale * grads.weight[i] + options.weight_decay * l.weight;
    vb = options.momentum * vb + scale * grads.bias[i] + options.weight_decay * l.bias;
    l.weight -= options.learning_rate * vw;
    l.bias -= options.learning_rate * vb;
  }
}

}  // namespace s2d
