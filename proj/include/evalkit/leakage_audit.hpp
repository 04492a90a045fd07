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

// Train/test leakage checks for video-derived datasets and a group-aware
// split generator that never lets one video straddle both sides.

#ifndef EVALKIT_LEAKAGE_AUDIT_HPP_
#define EVALKIT_LEAKAGE_AUDIT_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "evalkit/embedding_store.hpp"
#include "evalkit/report.hpp"

namespace evalkit {

inline constexpr double kDefaultDuplicateThreshold = 0.95;

struct VideoOverlap {
  std::string video_id;
  std::size_t train_samples = 0;
  std::size_t test_samples = 0;
  std::optional<std::int64_t> min_frame_gap;  // unset without frame indices
};

struct NearDuplicate {
  std::string train_id;
  std::string test_id;
  double similarity = 0.0;
};

struct LeakageReport {
  std::vector<VideoOverlap> video_overlap;     // sorted by video id
  std::vector<NearDuplicate> near_duplicates;  // similarity descending
  std::size_t test_count = 0;
  std::size_t implicated_test_count = 0;
  double leakage_rate = 0.0;
  std::optional<double> threshold;

  MetricReport to_report() const;
};

// Audits the split tags in `meta`. Near-duplicate pairs are reported only
// when `embeddings` is given; every meta sample must then have a row.
LeakageReport audit_split(const MetaTable& meta,
                          const EmbeddingSet* embeddings = nullptr,
                          double threshold = kDefaultDuplicateThreshold);

struct SplitAssignment {
  std::map<std::string, SplitTag> assignment;  // every sample is train/test
  std::uint64_t seed = 0;
  double test_fraction_target = 0.0;
  double achieved_test_fraction = 0.0;
  std::optional<std::string> stratify_key;
  std::vector<std::string> warnings;

  MetricReport to_report() const;
};

// Greedy group-aware split: videos are visited in seeded-shuffled order and
// each goes to the side that keeps the test fraction (and, with
// stratify_key == "class", every per-class test fraction) closest to the
// target in squared deviation. Single-video flips that lower the same cost
// are then applied until none remains. Samples without a video id form their
// own group.
SplitAssignment make_noleak_split(
    const MetaTable& meta, double test_fraction, std::uint64_t seed,
    const std::optional<std::string>& stratify_key = std::nullopt);

// Returns `meta` with split tags replaced by `assignment`.
MetaTable apply_split(const MetaTable& meta, const SplitAssignment& assignment);

struct SplitLists {
  std::vector<std::string> train;  // sorted
  std::vector<std::string> test;   // sorted
};

SplitLists split_to_lists(const SplitAssignment& assignment);

// train.txt and test.txt, one id per line.
void write_split_lists(const SplitLists& lists,
                       const std::filesystem::path& dir);
std::vector<std::string> read_id_list(const std::filesystem::path& path);

}  // namespace evalkit

#endif  // EVALKIT_LEAKAGE_AUDIT_HPP_
