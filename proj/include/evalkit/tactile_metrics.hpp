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

// Reference-based and reference-free MMD metrics for generated embeddings:
//
//   tmmd      unbiased MMD^2 between generated and reference sets
//   i_tmmd    MMD^2 between two disjoint halves of the generated set
//   ci_tmmd   i_tmmd averaged over classes
//   d_tmmd    per-class ratio of within-class split MMD^2 to the total
//             clamped divergence of that class, averaged over classes
//
// Class-aware metrics resolve one bandwidth on the full labeled set so that
// per-class values share a scale.

#ifndef EVALKIT_TACTILE_METRICS_HPP_
#define EVALKIT_TACTILE_METRICS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "evalkit/embedding_store.hpp"
#include "evalkit/kernel_mmd.hpp"
#include "evalkit/report.hpp"

namespace evalkit {

// Smallest set that can be split into two halves of >= 2 samples.
inline constexpr std::size_t kMinSplitSize = 4;

struct HalfSplit {
  std::vector<std::size_t> first;   // |first| - |second| in {0, 1}
  std::vector<std::size_t> second;
};

// Splits the samples named by `ids` into halves; returned indices point into
// `ids`. Both modes depend only on the set of id values, never on their
// order. Random shuffles are keyed by (seed, repeat) and by a digest of the
// id set, so distinct subsets sharing a seed shuffle independently.
std::vector<HalfSplit> split_halves(std::span<const std::string> ids,
                                    const SplitStrategy& strategy);

std::vector<HalfSplit> split_halves(const EmbeddingSet& set,
                                    const SplitStrategy& strategy);

struct DivergenceMatrix {
  std::vector<std::string> classes;
  DenseMatrix raw;
  DenseMatrix clamped;  // negatives set to 0
  std::vector<double> row_sums;  // of the clamped matrix
  double sigma = 0.0;

  // Builds clamped entries and row sums from a raw C x C matrix.
  static DivergenceMatrix from_raw(std::vector<std::string> classes,
                                   DenseMatrix raw, double sigma = 0.0);

  nlohmann::json to_json() const;
};

MetricReport tmmd(const EmbeddingSet& generated, const EmbeddingSet& reference,
                  const MmdConfig& config);

MetricReport i_tmmd(const EmbeddingSet& generated, const MmdConfig& config,
                    const SplitStrategy& strategy);

MetricReport ci_tmmd(const EmbeddingSet& generated,
                     const ClassPartition& partition, const MmdConfig& config,
                     const SplitStrategy& strategy);

DivergenceMatrix divergence_matrix(const EmbeddingSet& generated,
                                   const ClassPartition& partition,
                                   const MmdConfig& config,
                                   const SplitStrategy& strategy);

// Diversity aggregate of a divergence matrix; throws
// kIndeterminateDiversity when a clamped row sums to zero.
double diversity_score(const DivergenceMatrix& divergence);

MetricReport d_tmmd(const EmbeddingSet& generated,
                    const ClassPartition& partition, const MmdConfig& config,
                    const SplitStrategy& strategy);

}  // namespace evalkit

#endif  // EVALKIT_TACTILE_METRICS_HPP_
