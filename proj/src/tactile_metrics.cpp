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

#include "evalkit/tactile_metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>

#include "evalkit/counter_rng.hpp"
#include "evalkit/error.hpp"

namespace evalkit {
namespace {

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

// FNV-1a over the sorted ids, NUL-separated.
std::uint64_t id_set_digest(std::span<const std::string> ids,
                            std::span<const std::size_t> order) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (auto i : order) {
    for (unsigned char c : ids[i]) {
      h ^= c;
      h *= 0x100000001B3ULL;
    }
    h *= 0x100000001B3ULL;  // NUL separator
  }
  return h;
}

PointSet labeled_pool(const EmbeddingSet& set, const ClassPartition& p) {
  std::vector<std::size_t> rows;
  for (const auto& m : p.members) rows.insert(rows.end(), m.begin(), m.end());
  return PointSet::from(set, rows);
}

std::vector<std::string> ids_of(const EmbeddingSet& set,
                                std::span<const std::size_t> rows) {
  std::vector<std::string> ids;
  ids.reserve(rows.size());
  for (auto r : rows) ids.push_back(set.ids()[r]);
  return ids;
}

// Mean MMD^2 between the halves of every split of `points`.
double mean_split_mmd(const PointSet& points,
                      std::span<const std::string> ids, double sigma,
                      const SplitStrategy& strategy) {
  const auto splits = split_halves(ids, strategy);
  double total = 0.0;
  for (const auto& s : splits) {
    total += mmd2_unbiased_at(points.subset(s.first), points.subset(s.second),
                              sigma)
                 .value;
  }
  return total / static_cast<double>(splits.size());
}

MetricReport base_report(std::string metric, double sigma,
                         const MmdConfig& config) {
  MetricReport report;
  report.metric = std::move(metric);
  report.sigma = sigma;
  report.sigma_policy = config.policy;
  return report;
}

}  // namespace

std::vector<HalfSplit> split_halves(std::span<const std::string> ids,
                                    const SplitStrategy& strategy) {
  strategy.validate();
  const std::size_t n = ids.size();
  if (n < kMinSplitSize) {
    throw Error(ErrorCode::kTooFewSamples,
                "splitting into halves needs at least 4 samples, got " +
                    std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
  std::vector<std::size_t> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;
  const std::size_t first_size = (n + 1) / 2;

  std::vector<HalfSplit> out;
  if (strategy.mode == SplitMode::kInterleave) {
    HalfSplit split;
    for (std::size_t r = 0; r < n; ++r) {
      (r % 2 == 0 ? split.first : split.second).push_back(order[r]);
    }
    out.push_back(std::move(split));
    return out;
  }

  const std::uint64_t digest = id_set_digest(ids, order);
  auto by_rank = [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; };
  for (std::uint32_t rep = 0; rep < strategy.repeats; ++rep) {
    CounterRng rng(strategy.seed, mix64(digest + mix64(rep + 1)));
    std::vector<std::size_t> perm = order;
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(perm[i], perm[rng.bounded(i + 1)]);
    }
    HalfSplit split;
    split.first.assign(perm.begin(), perm.begin() + first_size);
    split.second.assign(perm.begin() + first_size, perm.end());
    std::sort(split.first.begin(), split.first.end(), by_rank);
    std::sort(split.second.begin(), split.second.end(), by_rank);
    out.push_back(std::move(split));
  }
  return out;
}

std::vector<HalfSplit> split_halves(const EmbeddingSet& set,
                                    const SplitStrategy& strategy) {
  return split_halves(set.ids(), strategy);
}

DivergenceMatrix DivergenceMatrix::from_raw(std::vector<std::string> classes,
                                            DenseMatrix raw, double sigma) {
  if (raw.rows != classes.size() || raw.cols != classes.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "divergence matrix must be C x C for C classes");
  }
  DivergenceMatrix d;
  d.classes = std::move(classes);
  d.clamped = raw;
  for (auto& v : d.clamped.data) v = std::max(v, 0.0);
  d.row_sums.assign(raw.rows, 0.0);
  for (std::size_t c = 0; c < raw.rows; ++c) {
    for (std::size_t k = 0; k < raw.cols; ++k) d.row_sums[c] += d.clamped(c, k);
  }
  d.raw = std::move(raw);
  d.sigma = sigma;
  return d;
}

nlohmann::json DivergenceMatrix::to_json() const {
  auto rows_of = [](const DenseMatrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.rows; ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t j = 0; j < m.cols; ++j) row.push_back(json_number(m(i, j)));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  nlohmann::json sums = nlohmann::json::array();
  for (double s : row_sums) sums.push_back(json_number(s));
  return {{"classes", classes},
          {"D", rows_of(raw)},
          {"D_clamped", rows_of(clamped)},
          {"row_sums", sums}};
}

MetricReport tmmd(const EmbeddingSet& generated, const EmbeddingSet& reference,
                  const MmdConfig& config) {
  auto v = mmd2_unbiased(PointSet::from(generated), PointSet::from(reference),
                         config);
  auto report = base_report("tmmd", v.sigma_used, config);
  report.value = v.value;
  report.extra["m"] = v.m;
  report.extra["n"] = v.n;
  return report;
}

MetricReport i_tmmd(const EmbeddingSet& generated, const MmdConfig& config,
                    const SplitStrategy& strategy) {
  if (generated.count() < kMinSplitSize) {
    throw Error(ErrorCode::kTooFewSamples,
                "I-TMMD needs at least 4 samples, got " +
                    std::to_string(generated.count()));
  }
  const auto points = PointSet::from(generated);
  const double sigma = resolve_sigma(config, points);
  auto report = base_report("itmmd", sigma, config);
  report.split = strategy;
  report.value = mean_split_mmd(points, generated.ids(), sigma, strategy);
  return report;
}

MetricReport ci_tmmd(const EmbeddingSet& generated,
                     const ClassPartition& partition, const MmdConfig& config,
                     const SplitStrategy& strategy) {
  std::vector<std::size_t> included;
  for (std::size_t c = 0; c < partition.class_count(); ++c) {
    if (partition.members[c].size() >= kMinSplitSize) included.push_back(c);
  }
  if (included.empty()) {
    throw Error(ErrorCode::kTooFewSamples,
                "CI-TMMD: no class has at least 4 samples");
  }
  const double sigma = resolve_sigma(config, labeled_pool(generated, partition));
  auto report = base_report("citmmd", sigma, config);
  report.split = strategy;

  double total = 0.0;
  for (std::size_t c = 0; c < partition.class_count(); ++c) {
    const auto& label = partition.classes[c];
    const auto& rows = partition.members[c];
    if (rows.size() < kMinSplitSize) {
      report.skipped.push_back(label);
      report.warnings.push_back("class '" + label + "' has " +
                                std::to_string(rows.size()) +
                                " samples (< 4); skipped");
      continue;
    }
    const double v = mean_split_mmd(PointSet::from(generated, rows),
                                    ids_of(generated, rows), sigma, strategy);
    report.classes.push_back(label);
    report.per_class[label] = v;
    total += v;
  }
  report.value = total / static_cast<double>(included.size());
  return report;
}

DivergenceMatrix divergence_matrix(const EmbeddingSet& generated,
                                   const ClassPartition& partition,
                                   const MmdConfig& config,
                                   const SplitStrategy& strategy) {
  const std::size_t classes = partition.class_count();
  if (classes == 0) {
    throw Error(ErrorCode::kTooFewSamples, "no labeled classes");
  }
  for (std::size_t c = 0; c < classes; ++c) {
    if (partition.members[c].size() < kMinSplitSize) {
      throw Error(ErrorCode::kTooFewSamples,
                  "class '" + partition.classes[c] + "' has " +
                      std::to_string(partition.members[c].size()) +
                      " samples; the divergence matrix needs at least 4");
    }
  }
  const double sigma = resolve_sigma(config, labeled_pool(generated, partition));
  std::vector<PointSet> points;
  points.reserve(classes);
  for (const auto& rows : partition.members) {
    points.push_back(PointSet::from(generated, rows));
  }

  DenseMatrix raw{classes, classes, std::vector<double>(classes * classes)};
  for (std::size_t c = 0; c < classes; ++c) {
    raw.data[c * classes + c] =
        mean_split_mmd(points[c], ids_of(generated, partition.members[c]),
                       sigma, strategy);
    for (std::size_t k = c + 1; k < classes; ++k) {
      const double v = mmd2_unbiased_at(points[c], points[k], sigma).value;
      raw.data[c * classes + k] = v;
      raw.data[k * classes + c] = v;
    }
  }
  return DivergenceMatrix::from_raw(partition.classes, std::move(raw), sigma);
}

double diversity_score(const DivergenceMatrix& divergence) {
  const std::size_t classes = divergence.classes.size();
  if (classes == 0) {
    throw Error(ErrorCode::kInvalidArgument, "empty divergence matrix");
  }
  double total = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    if (!(divergence.row_sums[c] > 0.0)) {
      throw Error(ErrorCode::kIndeterminateDiversity,
                  "indeterminate diversity: every divergence in the row of "
                  "class '" + divergence.classes[c] +
                      "' is non-positive");
    }
    total += divergence.clamped(c, c) / divergence.row_sums[c];
  }
  return total / static_cast<double>(classes);
}

MetricReport d_tmmd(const EmbeddingSet& generated,
                    const ClassPartition& partition, const MmdConfig& config,
                    const SplitStrategy& strategy) {
  auto divergence = divergence_matrix(generated, partition, config, strategy);
  auto report = base_report("dtmmd", divergence.sigma, config);
  report.split = strategy;
  report.value = diversity_score(divergence);
  report.classes = divergence.classes;
  for (std::size_t c = 0; c < divergence.classes.size(); ++c) {
    report.per_class[divergence.classes[c]] =
        divergence.clamped(c, c) / divergence.row_sums[c];
  }
  report.extra["divergence"] = divergence.to_json();
  return report;
}

}  // namespace evalkit
