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

#include "s2d/data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "s2d/errors.h"
#include "s2d/random.h"

namespace s2d {
namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_double(const std::string& cell, std::size_t line) {
  const std::string t = trim(cell);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() ||
      !std::isfinite(v)) {
    throw ParseError("invalid feature value '" + t + "'", line);
  }
  return v;
}

int parse_label(const std::string& cell, std::size_t line) {
  const std::string t = trim(cell);
  if (t.empty()) return kUnlabeled;
  int v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || v < 0) {
    throw ParseError("invalid label '" + t + "'", line);
  }
  return v;
}

}  // namespace

std::string to_string(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kTest:
      return "test";
    case Split::kOod:
      return "ood";
  }
  return "unknown";
}

bool Dataset::labeled() const {
  return std::none_of(labels.begin(), labels.end(),
                      [](int l) { return l == kUnlabeled; });
}

void Dataset::validate() const {
  if (labels.empty()) throw ContractError("dataset is empty");
  if (features.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw ContractError("dataset: feature rows and labels differ in length");
  }
  if (!features.allFinite()) {
    throw ContractError("dataset: non-finite feature value");
  }
  for (int l : labels) {
    if (l == kUnlabeled && split == Split::kOod) continue;
    if (l < 0 || l >= num_classes) {
      throw ContractError("dataset: label " + std::to_string(l) +
                          " outside [0, " + std::to_string(num_classes) + ")");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), dims());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) =
        features.row(static_cast<Eigen::Index>(rows[i]));
    out.labels.push_back(labels[rows[i]]);
  }
  out.num_classes = num_classes;
  out.split = split;
  return out;
}

double mixture_radius(double overlap) { return 8.0 - 7.0 * overlap; }

Dataset gen_mixture(const std::vector<Eigen::VectorXd>& means, int n_per_class,
                    double stddev, std::uint64_t seed, Split split) {
  if (means.size() < 2 || n_per_class < 1 || !(stddev > 0.0)) {
    throw ContractError("gen_mixture: need >= 2 means, n_per_class >= 1 and "
                        "stddev > 0");
  }
  const Eigen::Index d = means.front().size();
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, stddev);
  Dataset out;
  out.num_classes = static_cast<int>(means.size());
  out.split = split;
  out.features.resize(static_cast<Eigen::Index>(means.size()) * n_per_class, d);
  Eigen::Index row = 0;
  for (std::size_t k = 0; k < means.size(); ++k) {
    if (means[k].size() != d) throw ContractError("gen_mixture: ragged means");
    for (int i = 0; i < n_per_class; ++i, ++row) {
      for (Eigen::Index j = 0; j < d; ++j) {
        out.features(row, j) = means[k](j) + normal(rng);
      }
      out.labels.push_back(static_cast<int>(k));
    }
  }
  return out;
}

Dataset gen_gaussian_mixture(int num_classes, int n_per_class, int dims,
                             double overlap, std::uint64_t seed, Split split) {
  if (num_classes < 2 || dims < 2) {
    throw ContractError("gen_gaussian_mixture: need K >= 2 and d >= 2");
  }
  if (!(overlap >= 0.0 && overlap <= 1.0)) {
    throw ContractError("gen_gaussian_mixture: overlap must lie in [0, 1]");
  }
  const double r = mixture_radius(overlap);
  std::vector<Eigen::VectorXd> means;
  for (int k = 0; k < num_classes; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / num_classes;
    Eigen::VectorXd m = Eigen::VectorXd::Zero(dims);
    m(0) = r * std::cos(angle);
    m(1) = r * std::sin(angle);
    means.push_back(std::move(m));
  }
  return gen_mixture(means, n_per_class, 1.0, seed, split);
}

Dataset gen_ood_ring(int n, int dims, double radius, std::uint64_t seed,
                     double min_radius) {
  if (n < 1) throw ContractError("gen_ood_ring: n must be >= 1");
  if (dims < 1) throw ContractError("gen_ood_ring: dims must be >= 1");
  if (!(radius > min_radius)) {
    throw ContractError("gen_ood_ring: radius must exceed the ID support "
                        "radius");
  }
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset out;
  out.split = Split::kOod;
  out.features.resize(n, dims);
  for (int i = 0; i < n; ++i) {
    Eigen::RowVectorXd v(dims);
    do {
      for (int j = 0; j < dims; ++j) v(j) = normal(rng);
    } while (v.norm() == 0.0);
    out.features.row(i) = radius * v / v.norm();
  }
  out.labels.assign(static_cast<std::size_t>(n), kUnlabeled);
  return out;
}

double support_radius(const Dataset& d) {
  return d.features.rowwise().norm().maxCoeff();
}

Standardizer Standardizer::fit(const Dataset& train) {
  train.validate();
  Standardizer s;
  const double n = static_cast<double>(train.features.rows());
  s.mean = train.features.colwise().mean();
  const Eigen::MatrixXd centered = train.features.rowwise() - s.mean;
  s.scale = (centered.array().square().colwise().sum() / n).sqrt();
  for (Eigen::Index j = 0; j < s.scale.size(); ++j) {
    if (!(s.scale(j) > 0.0)) s.scale(j) = 1.0;
  }
  return s;
}

Dataset Standardizer::apply(const Dataset& d) const {
  if (d.dims() != mean.size()) {
    throw ContractError("Standardizer: dimension mismatch");
  }
  Dataset out = d;
  out.features = ((d.features.rowwise() - mean).array().rowwise() /
                  scale.array())
                     .matrix();
  return out;
}

Eigen::RowVectorXd Standardizer::apply(const Eigen::RowVectorXd& x) const {
  if (x.size() != mean.size()) {
    throw ContractError("Standardizer: dimension mismatch");
  }
  return ((x - mean).array() / scale.array()).matrix();
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& d,
                                             double test_fraction,
                                             std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ContractError("train_test_split: fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(d.size())));
  if (n_test == 0 || n_test == d.size()) {
    throw ContractError("train_test_split: split would leave a side empty");
  }
  std::vector<std::size_t> test_rows(order.begin(), order.begin() + n_test);
  std::vector<std::size_t> train_rows(order.begin() + n_test, order.end());
  std::sort(test_rows.begin(), test_rows.end());
  std::sort(train_rows.begin(), train_rows.end());
  Dataset train = d.subset(train_rows);
  Dataset test = d.subset(test_rows);
  train.split = Split::kTrain;
  test.split = Split::kTest;
  return {std::move(train), std::move(test)};
}

void save_csv(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (Eigen::Index j = 0; j < d.dims(); ++j) out << 'f' << j << ',';
  out << "label\n";
  char buf[32];
  for (Eigen::Index i = 0; i < d.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.dims(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", d.features(i, j));
      out << buf << ',';
    }
    if (d.labels[i] != kUnlabeled) out << d.labels[i];
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Dataset load_csv(const std::filesystem::path& path, Split split,
                 int num_classes) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) {
    throw ContractError("CSV file " + path.string() + " is empty");
  }
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_row(line);
  if (header.size() < 2 || trim(header.back()) != "label") {
    throw ParseError("header must be f0,...,f{d-1},label", line_no);
  }
  const std::size_t d = header.size() - 1;
  for (std::size_t j = 0; j < d; ++j) {
    if (trim(header[j]) != "f" + std::to_string(j)) {
      throw ParseError("unexpected header column '" + header[j] + "'", line_no);
    }
  }
  std::vector<double> values;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_row(line);
    if (cells.size() != d + 1) {
      throw ParseError("expected " + std::to_string(d + 1) + " columns, got " +
                           std::to_string(cells.size()),
                       line_no);
    }
    for (std::size_t j = 0; j < d; ++j) {
      values.push_back(parse_double(cells[j], line_no));
    }
    labels.push_back(parse_label(cells[d], line_no));
  }
  if (labels.empty()) {
    throw ContractError("CSV file " + path.string() + " has no data rows");
  }
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(labels.size()),
                      static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      out.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          values[i * d + j];
    }
  }
  out.labels = std::move(labels);
  out.split = split;
  if (num_classes > 0) {
    out.num_classes = num_classes;
  } else {
    const int top = *std::max_element(out.labels.begin(), out.labels.end());
    out.num_classes = std::max(top + 1, 0);
  }
  if (split == Split::kOod) {
    for (int& l : out.labels) l = kUnlabeled;
  }
  out.validate();
  return out;
}

}  // namespace s2d
