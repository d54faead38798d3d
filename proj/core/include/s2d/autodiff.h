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

#ifndef S2D_AUTODIFF_H_
#define S2D_AUTODIFF_H_

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace s2d::ad {

using Matrix = Eigen::MatrixXd;

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; only valid while the
// tape that created it is alive.
class Var {
 public:
  Var() = default;

  bool valid() const { return tape_ != nullptr; }
  int id() const { return id_; }
  Tape& tape() const { return *tape_; }
  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  // Value of a 1x1 node.
  double scalar() const;

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Records matrix-valued operations in creation order; backward() walks the
// record in reverse. Constants and detached nodes never receive gradient.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  // Leaf that accumulates gradient.
  Var variable(Matrix value);
  // Constant copy of `v`; gradient does not flow back through it.
  Var detach(Var v);

  // Zeroes every gradient, seeds d loss / d loss = 1 and back-propagates.
  // Throws ContractError if `loss` is not a 1x1 node of this tape.
  void backward(Var loss);

  // Gradient of the last backward() loss with respect to `v`. Throws
  // ContractError before backward() has run. Nodes that do not depend on a
  // variable have an all-zero gradient.
  const Matrix& grad(Var v) const;

  bool requires_grad(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  using Backprop = std::function<void(Tape&, const Matrix& out_grad)>;

  // Records an op result. `backprop` receives d loss / d out and must call
  // accumulate() on its inputs. Pass requires_grad = false for results that
  // do not depend on any variable.
  Var record(Matrix value, bool requires_grad, Backprop backprop);
  void accumulate(Var v, const Matrix& g);
  const Matrix& value(int id) const { return nodes_[id].value; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Backprop backprop;
  };

  Node& node(Var v);
  const Node& node(Var v) const;

  std::vector<Node> nodes_;
  bool has_gradients_ = false;
};

// Elementwise and linear-algebra ops. Shapes must match exactly unless noted.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var neg(Var a);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var square(Var a);
Var exp(Var a);
Var log(Var a);
// ln Γ elementwise; gradient is ψ.
Var lgamma(Var a);
// ψ elementwise; gradient is ψ'.
Var digamma(Var a);
// Gradient passes only where lo < a < hi.
Var clamp(Var a, double lo, double hi);
Var relu(Var a);

// x (B x in) times W^T (W is out x in) plus bias row (1 x out) broadcast.
Var linear(Var x, Var weight, Var bias);
// Row sums, B x K -> B x 1.
Var row_sum(Var a);
// Sum of all entries -> 1 x 1.
Var sum(Var a);
// Mean of all entries -> 1 x 1.
Var mean(Var a);
// Repeats a B x 1 column K times -> B x K.
Var broadcast_cols(Var a, Eigen::Index k);
// Row-wise log softmax of a / temperature.
Var log_softmax(Var a, double temperature = 1.0);
// out(i, 0) = a(i, index[i]).
Var pick(Var a, std::span<const int> index);

}  // namespace s2d::ad

#endif  // S2D_AUTODIFF_H_
