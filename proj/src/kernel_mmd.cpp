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

#include "evalkit/kernel_mmd.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "evalkit/error.hpp"
#include "evalkit/parallel.hpp"

namespace evalkit {
namespace {

constexpr std::size_t kTile = 64;

// Kernel terms are evaluated and reduced in extended precision so that
// near-zero MMD^2 values survive the cancellation between the three sums.
using Acc = long double;

Acc pairwise_sum(std::span<const Acc> v) {
  if (v.size() <= 8) {
    Acc s = 0.0L;
    for (Acc x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

double squared_distance(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double diff = x[k] - y[k];
    s += diff * diff;
  }
  return s;
}

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::kInvalidArgument,
                "kernel bandwidth must be a positive finite number, got " +
                    std::to_string(sigma));
  }
}

void check_dims(const PointSet& a, const PointSet& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "point sets have dimensions " + std::to_string(a.dim()) +
                    " and " + std::to_string(b.dim()));
  }
}

Acc kernel_term(std::span<const double> x, std::span<const double> y,
                Acc scale) {
  Acc s = 0.0L;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const Acc diff = static_cast<Acc>(x[k]) - static_cast<Acc>(y[k]);
    s += diff * diff;
  }
  return std::exp(-s * scale);
}

Acc kernel_scale(double sigma) {
  const Acc s = sigma;
  return 1.0L / (2.0L * s * s);
}

std::size_t tiles_for(std::size_t n) { return (n + kTile - 1) / kTile; }

// Total order on point sets used to canonicalize argument order.
bool precedes(const PointSet& a, const PointSet& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return std::lexicographical_compare(a.values().begin(), a.values().end(),
                                      b.values().begin(), b.values().end());
}

Acc offdiagonal_sum(const PointSet& a, double sigma) {
  const std::size_t n = a.size();
  const std::size_t t = tiles_for(n);
  // Upper-triangular tiles (ti <= tj), row-major.
  std::vector<std::pair<std::size_t, std::size_t>> tiles;
  for (std::size_t ti = 0; ti < t; ++ti) {
    for (std::size_t tj = ti; tj < t; ++tj) tiles.emplace_back(ti, tj);
  }
  const Acc scale = kernel_scale(sigma);
  std::vector<Acc> tile_sums(tiles.size());
  parallel_for(tiles.size(), [&](std::size_t idx) {
    auto [ti, tj] = tiles[idx];
    std::array<Acc, kTile * kTile> buf;
    std::size_t used = 0;
    const std::size_t i_end = std::min(n, (ti + 1) * kTile);
    const std::size_t j_end = std::min(n, (tj + 1) * kTile);
    for (std::size_t i = ti * kTile; i < i_end; ++i) {
      const std::size_t j_begin = ti == tj ? i + 1 : tj * kTile;
      for (std::size_t j = j_begin; j < j_end; ++j) {
        buf[used++] = kernel_term(a.row(i), a.row(j), scale);
      }
    }
    tile_sums[idx] = pairwise_sum(std::span<const Acc>(buf.data(), used));
  });
  return 2.0L * pairwise_sum(tile_sums);
}

Acc cross_sum(const PointSet& a, const PointSet& b, double sigma) {
  const PointSet& rows = precedes(b, a) ? b : a;
  const PointSet& cols = &rows == &a ? b : a;
  const std::size_t tr = tiles_for(rows.size());
  const std::size_t tc = tiles_for(cols.size());
  const Acc scale = kernel_scale(sigma);
  std::vector<Acc> tile_sums(tr * tc);
  parallel_for(tile_sums.size(), [&](std::size_t idx) {
    const std::size_t ti = idx / tc;
    const std::size_t tj = idx % tc;
    std::array<Acc, kTile * kTile> buf;
    std::size_t used = 0;
    const std::size_t i_end = std::min(rows.size(), (ti + 1) * kTile);
    const std::size_t j_end = std::min(cols.size(), (tj + 1) * kTile);
    for (std::size_t i = ti * kTile; i < i_end; ++i) {
      for (std::size_t j = tj * kTile; j < j_end; ++j) {
        buf[used++] = kernel_term(rows.row(i), cols.row(j), scale);
      }
    }
    tile_sums[idx] = pairwise_sum(std::span<const Acc>(buf.data(), used));
  });
  return pairwise_sum(tile_sums);
}

}  // namespace

PointSet::PointSet(std::size_t dim, std::vector<double> values)
    : dim_(dim), values_(std::move(values)) {
  if (dim_ == 0 || values_.size() % dim_ != 0) {
    throw Error(ErrorCode::kDimensionMismatch,
                "point buffer is not a whole number of rows");
  }
}

PointSet PointSet::from(const EmbeddingSet& set) {
  return PointSet(set.dim(), std::vector<double>(set.values().begin(),
                                                 set.values().end()));
}

PointSet PointSet::from(const EmbeddingSet& set,
                        std::span<const std::size_t> rows) {
  std::vector<double> values;
  values.reserve(rows.size() * set.dim());
  for (auto i : rows) {
    auto r = set.row(i);
    values.insert(values.end(), r.begin(), r.end());
  }
  return PointSet(set.dim(), std::move(values));
}

PointSet PointSet::subset(std::span<const std::size_t> rows) const {
  std::vector<double> values;
  values.reserve(rows.size() * dim_);
  for (auto i : rows) {
    auto r = row(i);
    values.insert(values.end(), r.begin(), r.end());
  }
  return PointSet(dim_, std::move(values));
}

PointSet PointSet::concat(const PointSet& a, const PointSet& b) {
  check_dims(a, b);
  std::vector<double> values(a.values());
  values.insert(values.end(), b.values().begin(), b.values().end());
  return PointSet(a.dim(), std::move(values));
}

std::string_view to_string(BandwidthPolicy policy) {
  return policy == BandwidthPolicy::kFixed ? "fixed" : "median_heuristic";
}

void MmdConfig::validate() const {
  if (policy == BandwidthPolicy::kFixed) check_sigma(sigma);
}

double rbf_kernel(std::span<const double> x, std::span<const double> y,
                  double sigma) {
  check_sigma(sigma);
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "kernel arguments have dimensions " + std::to_string(x.size()) +
                    " and " + std::to_string(y.size()));
  }
  return std::exp(-squared_distance(x, y) / (2.0 * sigma * sigma));
}

double median_heuristic_sigma(const PointSet& points) {
  const std::size_t n = points.size();
  if (n < 2) {
    throw Error(ErrorCode::kTooFewSamples,
                "median heuristic needs at least 2 points");
  }
  std::vector<double> sq;
  sq.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      sq.push_back(squared_distance(points.row(i), points.row(j)));
    }
  }
  auto mid = sq.begin() + static_cast<std::ptrdiff_t>((sq.size() - 1) / 2);
  std::nth_element(sq.begin(), mid, sq.end());
  const double sigma = std::sqrt(*mid);
  if (!(sigma > 0.0)) {
    throw Error(ErrorCode::kDegenerateBandwidth,
                "median pairwise distance is zero (points are identical); "
                "pass a fixed bandwidth instead");
  }
  return sigma;
}

double resolve_sigma(const MmdConfig& config, const PointSet& pool) {
  config.validate();
  if (config.policy == BandwidthPolicy::kFixed) return config.sigma;
  return median_heuristic_sigma(pool);
}

DenseMatrix kernel_matrix(const PointSet& a, const PointSet& b, double sigma) {
  check_dims(a, b);
  check_sigma(sigma);
  DenseMatrix k{a.size(), b.size(), std::vector<double>(a.size() * b.size())};
  const double scale = 1.0 / (2.0 * sigma * sigma);
  parallel_for(a.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      k.data[i * k.cols + j] =
          std::exp(-squared_distance(a.row(i), b.row(j)) * scale);
    }
  });
  return k;
}

double kernel_sum_offdiagonal(const PointSet& a, double sigma) {
  check_sigma(sigma);
  return static_cast<double>(offdiagonal_sum(a, sigma));
}

double kernel_sum_cross(const PointSet& a, const PointSet& b, double sigma) {
  check_dims(a, b);
  check_sigma(sigma);
  return static_cast<double>(cross_sum(a, b, sigma));
}

MmdValue mmd2_unbiased_at(const PointSet& g, const PointSet& r, double sigma) {
  check_dims(g, r);
  check_sigma(sigma);
  if (g.size() < 2 || r.size() < 2) {
    throw Error(ErrorCode::kTooFewSamples,
                "MMD needs at least 2 samples per set, got " +
                    std::to_string(g.size()) + " and " +
                    std::to_string(r.size()));
  }
  const Acc m = static_cast<Acc>(g.size());
  const Acc n = static_cast<Acc>(r.size());
  const Acc within_g = offdiagonal_sum(g, sigma) / (m * (m - 1.0L));
  const Acc within_r = offdiagonal_sum(r, sigma) / (n * (n - 1.0L));
  const Acc cross = cross_sum(g, r, sigma) * 2.0L / (m * n);
  return {static_cast<double>(within_g + within_r - cross), g.size(), r.size(),
          sigma};
}

MmdValue mmd2_unbiased(const PointSet& g, const PointSet& r,
                       const MmdConfig& config) {
  check_dims(g, r);
  if (g.size() < 2 || r.size() < 2) {
    throw Error(ErrorCode::kTooFewSamples,
                "MMD needs at least 2 samples per set, got " +
                    std::to_string(g.size()) + " and " +
                    std::to_string(r.size()));
  }
  const double sigma = config.policy == BandwidthPolicy::kFixed
                           ? resolve_sigma(config, g)
                           : median_heuristic_sigma(PointSet::concat(g, r));
  return mmd2_unbiased_at(g, r, sigma);
}

}  // namespace evalkit
