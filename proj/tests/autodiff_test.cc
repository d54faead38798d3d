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
#include <functional>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "oracles.h"
#include "s2d/errors.h"
#include "s2d/specfun.h"

namespace s2d::ad {
namespace {

Matrix random_matrix(std::mt19937_64& rng, int r, int c, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) m(i, j) = u(rng);
  }
  return m;
}

// Checks d sum(f(x) * weights) / dx against central differences, entry by
// entry.
void check_unary(const std::function<Var(Var)>& f, Matrix x, double tol,
                 std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  Matrix weights;
  {
    Tape t;
    const Matrix out = f(t.constant(x)).value();
    weights = random_matrix(rng, out.rows(), out.cols(), -1.0, 1.0);
  }
  auto value = [&](const Matrix& at) {
    Tape t;
    return sum(mul(f(t.variable(at)), t.constant(weights))).scalar();
  };
  Tape tape;
  Var v = tape.variable(x);
  tape.backward(sum(mul(f(v), tape.constant(weights))));
  const Matrix g = tape.grad(v);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(x(i, j)));
      Matrix up = x;
      Matrix dn = x;
      up(i, j) += h;
      dn(i, j) -= h;
      const double fd = (value(up) - value(dn)) / (2 * h);
      EXPECT_LT(oracle::relative_error(g(i, j), fd), tol)
          << "entry " << i << "," << j << " analytic " << g(i, j) << " fd " << fd;
    }
  }
}

TEST(Tape, SquareExample) {
  Tape tape;
  Var w = tape.variable(Matrix::Constant(1, 1, 3.0));
  Var loss = square(w);
  tape.backward(loss);
  EXPECT_DOUBLE_EQ(loss.scalar(), 9.0);
  EXPECT_DOUBLE_EQ(tape.grad(w)(0, 0), 6.0);
}

TEST(Tape, Contracts) {
  Tape tape;
  Var w = tape.variable(Matrix::Constant(2, 2, 1.0));
  EXPECT_THROW(tape.grad(w), ContractError);
  EXPECT_THROW(tape.backward(w), ContractError);
  EXPECT_THROW(tape.backward(Var()), ContractError);
  Tape other;
  Var foreign = other.variable(Matrix::Constant(1, 1, 1.0));
  EXPECT_THROW(tape.backward(foreign), ContractError);
  EXPECT_THROW(add(w, foreign), ContractError);
  EXPECT_THROW(add(w, tape.variable(Matrix::Constant(1, 2, 1.0))), ContractError);
}

TEST(Tape, ConstantsAndDetachedNodesGetNoGradient) {
  Tape tape;
  Var w = tape.variable(Matrix::Constant(1, 3, 2.0));
  Var c = tape.constant(Matrix::Constant(1, 3, 5.0));
  Var d = tape.detach(square(w));
  Var loss = sum(add(mul(w, c), mul(d, w)));
  tape.backward(loss);
  EXPECT_FALSE(tape.requires_grad(c));
  EXPECT_FALSE(tape.requires_grad(d));
  EXPECT_TRUE((tape.grad(c).array() == 0.0).all());
  EXPECT_TRUE((tape.grad(d).array() == 0.0).all());
  // d loss / dw = c + d (d treated as constant 4).
  EXPECT_TRUE((tape.grad(w).array() == 9.0).all());
}

TEST(Tape, BackwardResetsGradients) {
  Tape tape;
  Var w = tape.variable(Matrix::Constant(1, 1, 2.0));
  Var loss = square(w);
  tape.backward(loss);
  tape.backward(loss);
  EXPECT_DOUBLE_EQ(tape.grad(w)(0, 0), 4.0);
}

TEST(Tape, SharedSubexpressionAccumulates) {
  Tape tape;
  Var w = tape.variable(Matrix::Constant(1, 1, 1.5));
  Var y = exp(w);
  tape.backward(sum(add(y, mul(y, y))));
  EXPECT_NEAR(tape.grad(w)(0, 0), std::exp(1.5) + 2 * std::exp(3.0), 1e-12);
}

TEST(Ops, ElementwiseGradients) {
  std::mt19937_64 rng(3);
  const Matrix pos = random_matrix(rng, 3, 4, 0.2, 5.0);
  const Matrix any = random_matrix(rng, 3, 4, -3.0, 3.0);
  const Matrix other = random_matrix(rng, 3, 4, 0.5, 2.0);
  check_unary([](Var a) { return exp(a); }, any, 1e-7);
  check_unary([](Var a) { return log(a); }, pos, 1e-7);
  check_unary([](Var a) { return square(a); }, any, 1e-7);
  check_unary([](Var a) { return neg(scale(a, 2.5)); }, any, 1e-7);
  check_unary([](Var a) { return add_scalar(a, 0.7); }, any, 1e-7);
  check_unary([](Var a) { return lgamma(a); }, pos, 1e-6);
  check_unary([](Var a) { return digamma(a); }, pos, 1e-6);
  check_unary([&](Var a) { return mul(a, a.tape().constant(other)); }, any, 1e-7);
  check_unary([&](Var a) { return div(a, a.tape().constant(other)); }, any, 1e-7);
  check_unary([&](Var a) { return div(a.tape().constant(other), a); }, pos, 1e-7);
  check_unary([&](Var a) { return sub(a.tape().constant(other), a); }, any, 1e-7);
  check_unary([](Var a) { return relu(a); }, any, 1e-7);
  check_unary([](Var a) { return clamp(a, -2.0, 2.0); }, any, 1e-7);
}

TEST(Ops, ReductionsAndBroadcast) {
  std::mt19937_64 rng(4);
  const Matrix x = random_matrix(rng, 4, 3, -2.0, 2.0);
  check_unary([](Var a) { return row_sum(a); }, x, 1e-7);
  check_unary([](Var a) { return broadcast_cols(row_sum(a), 5); }, x, 1e-7);
  check_unary([](Var a) { return mean(a); }, x, 1e-7);
  check_unary([](Var a) { return log_softmax(a); }, x, 1e-7);
  check_unary([](Var a) { return log_softmax(a, 1.5); }, x, 1e-7);
  const std::vector<int> labels = {0, 2, 1, 2};
  check_unary([&](Var a) { return pick(a, labels); }, x, 1e-7);
}

TEST(Ops, LinearGradients) {
  std::mt19937_64 rng(5);
  const Matrix x = random_matrix(rng, 5, 3, -1.0, 1.0);
  const Matrix w = random_matrix(rng, 4, 3, -1.0, 1.0);
  const Matrix b = random_matrix(rng, 1, 4, -1.0, 1.0);
  check_unary([&](Var a) { Tape& t = a.tape(); return linear(a, t.constant(w), t.constant(b)); },
              x, 1e-7);
  check_unary([&](Var a) { Tape& t = a.tape(); return linear(t.constant(x), a, t.constant(b)); },
              w, 1e-7);
  check_unary([&](Var a) { Tape& t = a.tape(); return linear(t.constant(x), t.constant(w), a); },
              b, 1e-7);
}

TEST(Ops, LgammaGradientIsDigamma) {
  for (double x : {0.05, 0.9, 1.0, 4.5, 300.0}) {
    Tape tape;
    Var v = tape.variable(Matrix::Constant(1, 1, x));
    tape.backward(sum(lgamma(v)));
    const double h = 1e-5 * x;
    const double fd = (std::lgamma(x + h) - std::lgamma(x - h)) / (2 * h);
    EXPECT_LT(oracle::relative_error(tape.grad(v)(0, 0), fd), 1e-6) << x;
    EXPECT_DOUBLE_EQ(tape.grad(v)(0, 0), s2d::digamma(x));
  }
}

TEST(Ops, ClampBlocksGradientOutsideRange) {
  Tape tape;
  Matrix x(1, 3);
  x << -5.0, 0.5, 5.0;
  Var v = tape.variable(x);
  tape.backward(sum(clamp(v, -1.0, 1.0)));
  EXPECT_EQ(tape.grad(v)(0, 0), 0.0);
  EXPECT_EQ(tape.grad(v)(0, 1), 1.0);
  EXPECT_EQ(tape.grad(v)(0, 2), 0.0);
}

TEST(Ops, LogSoftmaxValues) {
  Tape tape;
  Matrix z(2, 3);
  z << 1.0, 2.0, 3.0, -1000.0, 0.0, 1000.0;
  const Matrix out = log_softmax(tape.constant(z), 2.0).value();
  for (int i = 0; i < 2; ++i) {
    const std::vector<double> row = {z(i, 0), z(i, 1), z(i, 2)};
    const auto want = s2d::log_softmax(row, 2.0);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(out(i, c), want[c], 1e-12);
  }
}

}  // namespace
}  // namespace s2d::ad
