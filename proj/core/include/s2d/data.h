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

#ifndef S2D_DATA_H_
#define S2D_DATA_H_

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace s2d {

enum class Split { kTrain, kTest, kOod };

std::string to_string(Split split);

// Label used for out-of-distribution rows.
inline constexpr int kUnlabeled = -1;

struct Dataset {
  Eigen::MatrixXd features;  // n x d
  std::vector<int> labels;   // n entries, kUnlabeled for OOD rows
  int num_classes = 0;
  Split split = Split::kTrain;

  std::size_t size() const { return labels.size(); }
  Eigen::Index dims() const { return features.cols(); }
  bool labeled() const;
  // Throws ContractError on n == 0, shape mismatch, non-finite features or
  // labels outside [0, K) (kUnlabeled allowed only for OOD).
  void validate() const;
  Dataset subset(std::span<const std::size_t> rows) const;
};

// Radius of the circle carrying the class means: 8 at overlap 0, 1 at
// overlap 1.
double mixture_radius(double overlap);

// K unit-variance Gaussian clusters, means evenly spaced on a circle of
// radius mixture_radius(overlap) in the first two dimensions. Rows are grouped
// by class.
Dataset gen_gaussian_mixture(int num_classes, int n_per_class, int dims,
                             double overlap, std::uint64_t seed,
                             Split split = Split::kTrain);

// Isotropic clusters around explicit means.
Dataset gen_mixture(const std::vector<Eigen::VectorXd>& means, int n_per_class,
                    double stddev, std::uint64_t seed,
                    Split split = Split::kTrain);

// n points uniform on the sphere of the given radius in `dims` dimensions.
// Throws ContractError if n == 0 or radius <= min_radius.
Dataset gen_ood_ring(int n, int dims, double radius, std::uint64_t seed,
                     double min_radius = 0.0);

// Largest Euclidean norm of any row.
double support_radius(const Dataset& d);

// Per-dimension affine map fitted on training data.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static Standardizer fit(const Dataset& train);
  Dataset apply(const Dataset& d) const;
  Eigen::RowVectorXd apply(const Eigen::RowVectorXd& x) const;
};

// Deterministic shuffled split; returns (train, test).
std::pair<Dataset, Dataset> train_test_split(const Dataset& d,
                                             double test_fraction,
                                             std::uint64_t seed);

// Header f0,...,f{d-1},label; empty label for unlabeled rows. Doubles are
// written with 17 significant digits.
void save_csv(const Dataset& d, const std::filesystem::path& path);

// num_classes = 0 infers K as max label + 1. Throws ParseError (with line
// number) on malformed rows and ContractError on an empty file.
Dataset load_csv(const std::filesystem::path& path, Split split = Split::kTrain,
                 int num_classes = 0);

}  // namespace s2d

#endif  // S2D_DATA_H_
