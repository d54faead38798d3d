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

#include "s2d/autodiff.h"

#include <cmath>
#include <string>

#include "s2d/errors.h"
#include "s2d/specfun.h"

namespace s2d::ad {

const Matrix& Var::value() const {
  if (tape_ == nullptr) throw ContractError("use of an unbound Var");
  return tape_->value(id_);
}

double Var::scalar() const {
  const Matrix& v = value();
  if (v.size() != 1) throw ContractError("Var::scalar on a non 1x1 node");
  return v(0, 0);
}

Var Tape::constant(Matrix value) { return record(std::move(value), false, {}); }

Var Tape::variable(Matrix value) { return record(std::move(value), true, {}); }

Var Tape::detach(Var v) { return constant(node(v).value); }

Var Tape::record(Matrix value, bool requires_grad, Backprop backprop) {
  nodes_.push_back(Node{std::move(value), Matrix(), requires_grad,
                        std::move(backprop)});
  has_gradients_ = false;
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Tape::Node& Tape::node(Var v) {
  if (v.tape_ != this || v.id_ < 0 ||
      v.id_ >= static_cast<int>(nodes_.size())) {
    throw ContractError("Var does not belong to this tape");
  }
  return nodes_[v.id_];
}

const Tape::Node& Tape::node(Var v) const {
  return const_cast<Tape*>(this)->node(v);
}

bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

void Tape::accumulate(Var v, const Matrix& g) {
  Node& n = node(v);
  if (!n.requires_grad) return;
  n.grad += g;
}

void Tape::backward(Var loss) {
  if (nodes_.empty() || !loss.valid()) {
    throw ContractError("backward called before any forward computation");
  }
  Node& root = node(loss);
  if (root.value.size() != 1) {
    throw ContractError("backward needs a scalar (1x1) loss node");
  }
  for (Node& n : nodes_) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  root.grad(0, 0) = root.requires_grad ? 1.0 : 0.0;
  for (int id = loss.id_; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.requires_grad || !n.backprop) continue;
    // Copy: backprop may append to nothing, but accumulate() touches other
    // nodes and must not alias this gradient.
    const Matrix g = n.grad;
    n.backprop(*this, g);
  }
  has_gradients_ = true;
}

const Matrix& Tape::grad(Var v) const {
  if (!has_gradients_) {
    throw ContractError("gradient requested before backward()");
  }
  return node(v).grad;
}

namespace {

void check_same_shape(Var a, Var b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ContractError(std::string(op) + ": shape mismatch (" +
                        std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + " vs " +
                        std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()) + ")");
  }
}

Tape& same_tape(Var a, Var b) {
  if (&a.tape() != &b.tape()) throw ContractError("Vars from different tapes");
  return a.tape();
}

bool any_grad(Var a) { return a.tape().requires_grad(a); }
bool any_grad(Var a, Var b) { return any_grad(a) || any_grad(b); }

template <typename F>
Matrix map(const Matrix& m, F f) {
  return m.unaryExpr(f);
}

}  // namespace

Var add(Var a, Var b) {
  check_same_shape(a, b, "add");
  Tape& t = same_tape(a, b);
  return t.record(a.value() + b.value(), any_grad(a, b),
                  [a, b](Tape& tape, const Matrix& g) {
                    tape.accumulate(a, g);
                    tape.accumulate(b, g);
                  });
}

Var sub(Var a, Var b) {
  check_same_shape(a, b, "sub");
  Tape& t = same_tape(a, b);
  return t.record(a.value() - b.value(), any_grad(a, b),
                  [a, b](Tape& tape, const Matrix& g) {
                    tape.accumulate(a, g);
                    tape.accumulate(b, -g);
                  });
}

Var mul(Var a, Var b) {
  check_same_shape(a, b, "mul");
  Tape& t = same_tape(a, b);
  return t.record(a.value().cwiseProduct(b.value()), any_grad(a, b),
                  [a, b](Tape& tape, const Matrix& g) {
                    tape.accumulate(a, g.cwiseProduct(b.value()));
                    tape.accumulate(b, g.cwiseProduct(a.value()));
                  });
}

Var div(Var a, Var b) {
  check_same_shape(a, b, "div");
  Tape& t = same_tape(a, b);
  return t.record(a.value().cwiseQuotient(b.value()), any_grad(a, b),
                  [a, b](Tape& tape, const Matrix& g) {
                    const Matrix& bv = b.value();
                    tape.accumulate(a, g.cwiseQuotient(bv));
                    tape.accumulate(b, -g.cwiseProduct(a.value())
                                           .cwiseQuotient(bv.cwiseProduct(bv)));
                  });
}

Var neg(Var a) { return scale(a, -1.0); }

Var scale(Var a, double s) {
  return a.tape().record(a.value() * s, any_grad(a),
                         [a, s](Tape& tape, const Matrix& g) {
                           tape.accumulate(a, g * s);
                         });
}

Var add_scalar(Var a, double s) {
  return a.tape().record(a.value().array() + s, any_grad(a),
                         [a](Tape& tape, const Matrix& g) {
                           tape.accumulate(a, g);
                         });
}

Var square(Var a) {
  return a.tape().record(a.value().cwiseProduct(a.value()), any_grad(a),
                         [a](Tape& tape, const Matrix& g) {
                           tape.accumulate(a, 2.0 * g.cwiseProduct(a.value()));
                         });
}

Var exp(Var a) {
  Matrix out = a.value().array().exp();
  const int out_id = a.tape().size();
  return a.tape().record(std::move(out), any_grad(a),
                         [a, out_id](Tape& tape, const Matrix& g) {
                           tape.accumulate(a, g.cwiseProduct(tape.value(out_id)));
                         });
}

Var log(Var a) {
  return a.tape().record(a.value().array().log(), any_grad(a),
                         [a](Tape& tape, const Matrix& g) {
                           tape.accumulate(a, g.cwiseQuotient(a.value()));
                         });
}

Var lgamma(Var a) {
  return a.tape().record(
      map(a.value(), [](double x) { return s2d::log_gamma(x); }), any_grad(a),
      [a](Tape& tape, const Matrix& g) {
        tape.accumulate(a, g.cwiseProduct(map(a.value(), [](double x) {
          return s2d::digamma(x);
        })));
      });
}

Var digamma(Var a) {
  return a.tape().record(
      map(a.value(), [](double x) { return s2d::digamma(x); }), any_grad(a),
      [a](Tape& tape, const Matrix& g) {
        tape.accumulate(a, g.cwiseProduct(map(a.value(), [](double x) {
          return s2d::trigamma(x);
        })));
      });
}

Var clamp(Var a, double lo, double hi) {
  return a.tape().record(
      a.value().cwiseMax(lo).cwiseMin(hi), any_grad(a),
      [a, lo, hi](Tape& tape, const Matrix& g) {
        const Matrix& v = a.value();
        Matrix masked = g;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
          if (!(v.data()[i] > lo && v.data()[i] < hi)) masked.data()[i] = 0.0;
        }
        tape.accumulate(a, masked);
      });
}

Var relu(Var a) {
  return a.tape().record(
      a.value().cwiseMax(0.0), any_grad(a),
      [a](Tape& tape, const Matrix& g) {
        tape.accumulate(a, (a.value().array() > 0.0).select(g, 0.0).matrix());
      });
}

Var linear(Var x, Var weight, Var bias) {
  Tape& t = same_tape(x, weight);
  same_tape(x, bias);
  if (x.cols() != weight.cols() || bias.rows() != 1 ||
      bias.cols() != weight.rows()) {
    throw ContractError("linear: incompatible shapes, input has " +
                        std::to_string(x.cols()) + " features, layer expects " +
                        std::to_string(weight.cols()));
  }
  Matrix out = x.value() * weight.value().transpose();
  out.rowwise() += bias.value().row(0);
  return t.record(std::move(out), any_grad(x, weight) || any_grad(bias),
                  [x, weight, bias](Tape& tape, const Matrix& g) {
                    if (tape.requires_grad(x)) {
                      tape.accumulate(x, g * weight.value());
                    }
                    if (tape.requires_grad(weight)) {
                      tape.accumulate(weight, g.transpose() * x.value());
                    }
                    if (tape.requires_grad(bias)) {
                      tape.accumulate(bias, g.colwise().sum());
                    }
                  });
}

Var row_sum(Var a) {
  return a.tape().record(a.value().rowwise().sum(), any_grad(a),
                         [a](Tape& tape, const Matrix& g) {
                           tape.accumulate(a, g.replicate(1, a.cols()));
                         });
}

Var sum(Var a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return a.tape().record(std::move(out), any_grad(a),
                         [a](Tape& tape, const Matrix& g) {
                           tape.accumulate(
                               a, Matrix::Constant(a.rows(), a.cols(), g(0, 0)));
                         });
}

Var mean(Var a) {
  if (a.value().size() == 0) throw ContractError("mean of an empty node");
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var broadcast_cols(Var a, Eigen::Index k) {
  if (a.cols() != 1) throw ContractError("broadcast_cols needs a column");
  return a.tape().record(a.value().replicate(1, k), any_grad(a),
                         [a](Tape& tape, const Matrix& g) {
                           tape.accumulate(a, g.rowwise().sum());
                         });
}

Var log_softmax(Var a, double temperature) {
  if (!(temperature > 0.0)) {
    throw DomainError("log_softmax: temperature must be positive");
  }
  Matrix out = a.value() / temperature;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double top = out.row(i).maxCoeff();
    const double norm = top + std::log((out.row(i).array() - top).exp().sum());
    out.row(i).array() -= norm;
  }
  const int out_id = a.tape().size();
  return a.tape().record(
      std::move(out), any_grad(a),
      [a, out_id, temperature](Tape& tape, const Matrix& g) {
        const Matrix probs = tape.value(out_id).array().exp();
        const Eigen::VectorXd gsum = g.rowwise().sum();
        Matrix ga = g - (probs.array().colwise() * gsum.array()).matrix();
        tape.accumulate(a, ga / temperature);
      });
}

Var pick(Var a, std::span<const int> index) {
  if (static_cast<Eigen::Index>(index.size()) != a.rows()) {
    throw ContractError("pick: one index per row required");
  }
  Matrix out(a.rows(), 1);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const int c = index[i];
    if (c < 0 || c >= a.cols()) throw ContractError("pick: index out of range");
    out(i, 0) = a.value()(i, c);
  }
  std::vector<int> idx(index.begin(), index.end());
  return a.tape().record(std::move(out), any_grad(a),
                         [a, idx = std::move(idx)](Tape& tape, const Matrix& g) {
                           Matrix ga = Matrix::Zero(a.rows(), a.cols());
                           for (Eigen::Index i = 0; i < a.rows(); ++i) {
                             ga(i, idx[i]) = g(i, 0);
                           }
                           tape.accumulate(a, ga);
                         });
}

}  // namespace s2d::ad
