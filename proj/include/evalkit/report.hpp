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

#ifndef EVALKIT_REPORT_HPP_
#define EVALKIT_REPORT_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "evalkit/kernel_mmd.hpp"

namespace evalkit {

enum class SplitMode { kInterleave, kSeededRandom };

std::string_view to_string(SplitMode mode);

// How a sample set is cut into two halves for the reference-free metrics.
struct SplitStrategy {
  SplitMode mode = SplitMode::kSeededRandom;
  std::uint64_t seed = 0;
  std::uint32_t repeats = 5;

  static SplitStrategy interleave() { return {SplitMode::kInterleave, 0, 1}; }
  static SplitStrategy seeded_random(std::uint64_t seed,
                                     std::uint32_t repeats) {
    return {SplitMode::kSeededRandom, seed, repeats};
  }

  // Number of half-splits this strategy produces.
  std::uint32_t pair_count() const {
    return mode == SplitMode::kInterleave ? 1 : repeats;
  }

  void validate() const;
};

// Common result envelope for every metric. `extra` carries metric-specific
// payload (divergence matrix, retrieval ranks, leakage findings, ...).
struct MetricReport {
  std::string metric;
  std::optional<double> value;
  std::optional<double> sigma;
  std::optional<BandwidthPolicy> sigma_policy;
  std::optional<SplitStrategy> split;
  std::vector<std::string> classes;
  std::map<std::string, double> per_class;
  std::vector<std::string> skipped;
  std::map<std::string, std::string> inputs;  // path -> sha256 hex
  std::vector<std::string> warnings;
  nlohmann::json extra = nlohmann::json::object();
};

enum class ReportFormat { kJson, kCsvSummary };

nlohmann::json to_json(const MetricReport& report);

// Serialized report, newline-terminated. Both formats print numbers with the
// same shortest round-trip representation.
std::string format_report(const MetricReport& report, ReportFormat format);

// Number rendering shared by all report formats. Non-finite values render as
// the strings "inf", "-inf" and "nan".
nlohmann::json json_number(double value);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string file_sha256(const std::filesystem::path& path);

}  // namespace evalkit

#endif  // EVALKIT_REPORT_HPP_
