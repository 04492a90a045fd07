/*
 * Copyright 2026 The tactile-evalkit Authors.
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

// Gaussian RBF kernel, bandwidth selection and the unbiased MMD^2 estimator.
//
// All kernel sums are accumulated in a fixed order: the kernel matrix is cut
// into 64x64 tiles, each tile is reduced pairwise in row-major entry order,
// and the tile sums are reduced pairwise in row-major tile order. Tiles may be
// evaluated on any number of threads without changing a single bit of the
// result.

#ifndef EVALKIT_KERNEL_MMD_HPP_
#define EVALKIT_KERNEL_MMD_HPP_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "evalkit/embedding_store.hpp"

namespace evalkit {

// Row-major n x d matrix of 64-bit points. Embeddings are promoted to this
// representation before any metric arithmetic.
class PointSet {
 public:
  PointSet() = default;
  PointSet(std::size_t dim, std::vector<double> values);

  static PointSet from(const EmbeddingSet& set);
  static PointSet from(const EmbeddingSet& set,
                       std::span<const std::size_t> rows);

  std::size_t size() const { return dim_ == 0 ? 0 : values_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  const std::vector<double>& values() const { return values_; }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }

  PointSet subset(std::span<const std::size_t> rows) const;
  static PointSet concat(const PointSet& a, const PointSet& b);

 private:
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  double operator()(std::size_t i, std::size_t j) const {
    return data[i * cols + j];
  }
};

enum class BandwidthPolicy { kFixed, kMedianHeuristic };

std::string_view to_string(BandwidthPolicy policy);

struct MmdConfig {
  BandwidthPolicy policy = BandwidthPolicy::kMedianHeuristic;
  double sigma = 0.0;  // used only when policy == kFixed

  static MmdConfig fixed(double sigma) {
    return {BandwidthPolicy::kFixed, sigma};
  }
  static MmdConfig median() { return {}; }

  void validate() const;
};

struct MmdValue {
  double value = 0.0;  // may be negative
  std::size_t m = 0;
  std::size_t n = 0;
  double sigma_used = 0.0;
};

double rbf_kernel(std::span<const double> x, std::span<const double> y,
                  double sigma);

// Lower median of the pairwise Euclidean distances over all unordered pairs.
double median_heuristic_sigma(const PointSet& points);

// The bandwidth `config` selects for data `pool`.
double resolve_sigma(const MmdConfig& config, const PointSet& pool);

DenseMatrix kernel_matrix(const PointSet& a, const PointSet& b, double sigma);

// sum_{i != j} k(a_i, a_j).
double kernel_sum_offdiagonal(const PointSet& a, double sigma);

// sum_{i, j} k(a_i, b_j). Bit-identical under swapping the arguments.
double kernel_sum_cross(const PointSet& a, const PointSet& b, double sigma);

MmdValue mmd2_unbiased(const PointSet& g, const PointSet& r,
                       const MmdConfig& config);

// Estimator with an already-resolved bandwidth.
MmdValue mmd2_unbiased_at(const PointSet& g, const PointSet& r, double sigma);

}  // namespace evalkit

#endif  // EVALKIT_KERNEL_MMD_HPP_
