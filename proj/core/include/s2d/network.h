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

#ifndef S2D_NETWORK_H_
#define S2D_NETWORK_H_

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "s2d/autodiff.h"
#include "s2d/dirichlet.h"
#include "s2d/gaussian_head.h"
#include "s2d/random.h"

namespace s2d {

enum class Activation { kRelu, kIdentity };

// How the heads hang off the trunk.
//   kStandard:    trunk -> head, softmax classifier.
//   kSelfDistill: trunk -> head for the student (Dirichlet from exp(logits)),
//                 trunk -> noise -> head for the stochastic teacher.
//   kGaussian:    trunk -> head gives mu of ln α, trunk -> sigma_head gives
//                 sigma.
enum class HeadWiring { kStandard, kSelfDistill, kGaussian };

std::string to_string(HeadWiring wiring);
HeadWiring head_wiring_from_string(const std::string& name);

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
  Activation activation = Activation::kIdentity;
  // Bernoulli dropout rate applied to this layer's input in stochastic passes.
  double dropout = 0.0;

  Eigen::Index in() const { return weight.cols(); }
  Eigen::Index out() const { return weight.rows(); }
};

// Multiplicative Gaussian noise N(1, s^2) on the features entering the shared
// final layer, with s ~ U[std_lo, std_hi] drawn per row in every pass.
struct NoiseSpec {
  double std_lo = 0.05;
  double std_hi = 0.5;

  void validate() const;
};

struct NetworkParams {
  std::vector<DenseLayer> trunk;
  DenseLayer head;  // final linear layer, shared by teacher and student
  std::optional<DenseLayer> sigma_head;
  HeadWiring wiring = HeadWiring::kStandard;
  NoiseSpec noise;
  std::uint64_t seed = 0;

  Eigen::Index input_dim() const;
  Eigen::Index feature_dim() const;
  Eigen::Index num_classes() const { return head.out(); }
  std::vector<int> hidden_sizes() const;
  bool has_dropout() const;

  // Canonical layer order: trunk..., head, sigma_head.
  std::vector<const DenseLayer*> layers() const;
  std::vector<DenseLayer*> layers();

  // Throws ContractError on incompatible dimensions, bad dropout rates or a
  // wiring/sigma-head mismatch.
  void validate() const;
};

struct MlpSpec {
  int input_dim = 2;
  std::vector<int> hidden = {64, 64};
  int num_classes = 3;
  HeadWiring wiring = HeadWiring::kStandard;
  // Applied to the input of every layer after the first.
  double dropout = 0.0;
  NoiseSpec noise;
};

// He-initialised ReLU MLP.
NetworkParams make_network(const MlpSpec& spec, std::uint64_t seed);

// Adds a sigma head (zero weights, bias ln initial_sigma) and switches the
// wiring to kGaussian.
void attach_sigma_head(NetworkParams& params, double initial_sigma = 1.0);

// Layer applications on the calling thread since the last reset. Used to
// check that teacher sampling reuses a single trunk evaluation.
std::size_t layer_invocations();
void reset_layer_invocations();

// Deterministic student path: no noise, no dropout. Rows of `x` are inputs.
Eigen::MatrixXd forward_deterministic(const NetworkParams& p,
                                      const Eigen::MatrixXd& x);
Eigen::VectorXd forward_deterministic(const NetworkParams& p,
                                      std::span<const double> x);

// M stochastic teacher logit vectors from one trunk evaluation.
std::vector<Eigen::VectorXd> forward_teacher_samples(const NetworkParams& p,
                                                     const NoiseSpec& spec,
                                                     std::span<const double> x,
                                                     std::size_t m,
                                                     std::uint64_t seed);

// M softmax outputs with Bernoulli dropout active (inverted scaling).
std::vector<CategoricalDist> forward_mc_dropout(const NetworkParams& p,
                                                std::span<const double> x,
                                                std::size_t m,
                                                std::uint64_t seed);

struct GaussianOutputs {
  Eigen::MatrixXd mu;
  Eigen::MatrixXd sigma;
};

// Batched (mu, sigma) of a kGaussian network.
GaussianOutputs forward_gaussian(const NetworkParams& p,
                                 const Eigen::MatrixXd& x);
DiagGaussian forward_gaussian(const NetworkParams& p,
                              std::span<const double> x);

// Per-layer gradients in canonical layer order.
struct ParamGrads {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;

  static ParamGrads zeros_like(const NetworkParams& p);
  double max_abs() const;
};

// Network parameters recorded on a tape.
class BoundNetwork {
 public:
  // trainable = false records the parameters as constants.
  BoundNetwork(ad::Tape& tape, const NetworkParams& params, bool trainable);

  // Trunk features. Dropout is active iff `dropout_rng` is non-null.
  ad::Var trunk(ad::Var x, Rng* dropout_rng = nullptr) const;
  // Shared final linear layer.
  ad::Var head(ad::Var features, Rng* dropout_rng = nullptr) const;
  // One stochastic teacher pass: features * N(1, s^2) noise, then head. The
  // noise mask is a constant of the pass.
  ad::Var teacher_pass(ad::Var features, const NoiseSpec& spec, Rng& rng) const;
  // sigma = clamp(exp(raw), kSigmaMin, kSigmaMax); kGaussian only.
  ad::Var sigma(ad::Var features) const;

  ParamGrads gradients() const;
  const NetworkParams& params() const { return params_; }

 private:
  struct BoundLayer {
    ad::Var weight;
    ad::Var bias;
    const DenseLayer* layer;
  };

  ad::Var apply(const BoundLayer& layer, ad::Var x, Rng* dropout_rng) const;

  ad::Tape& tape_;
  const NetworkParams& params_;
  std::vector<BoundLayer> trunk_;
  BoundLayer head_;
  std::optional<BoundLayer> sigma_head_;
};

struct SgdOptions {
  double learning_rate = 0.05;
  double momentum = 0.9;
  double weight_decay = 0.0;
  // Gradients whose global L2 norm exceeds this are rescaled to it; 0 turns
  // clipping off.
  double max_grad_norm = 0.0;
};

// Momentum buffers, one per parameter tensor.
struct SgdState {
  ParamGrads velocity;
};

// v <- momentum * v + grad + weight_decay * w; w <- w - lr * v, with grad
// clipped first when max_grad_norm > 0. Throws
// NumericError naming the parameter on a non-finite gradient and
// ContractError on invalid options or shape mismatch.
void sgd_step(NetworkParams& p, const ParamGrads& grads, SgdState& state,
              const SgdOptions& options);

}  // namespace s2d

#endif  // S2D_NETWORK_H_
