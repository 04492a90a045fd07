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

#include "evalkit/report.hpp"

#include <cmath>
#include <cstdio>
#include <memory>

#include <openssl/evp.h>

#include "evalkit/error.hpp"

namespace evalkit {
namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string scalar_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

// Flattens nested objects/arrays to dotted keys, preserving the JSON
// rendering of every leaf.
void flatten(const std::string& prefix, const nlohmann::json& node,
             std::vector<std::pair<std::string, std::string>>& out) {
  if (node.is_object()) {
    for (const auto& [key, child] : node.items()) {
      flatten(prefix.empty() ? key : prefix + "." + key, child, out);
    }
  } else if (node.is_array()) {
    for (std::size_t i = 0; i < node.size(); ++i) {
      flatten(prefix + "." + std::to_string(i), node[i], out);
    }
  } else {
    out.emplace_back(prefix, scalar_text(node));
  }
}

}  // namespace

std::string_view to_string(SplitMode mode) {
  return mode == SplitMode::kInterleave ? "interleave" : "random";
}

void SplitStrategy::validate() const {
  if (mode == SplitMode::kSeededRandom && repeats < 1) {
    throw Error(ErrorCode::kInvalidArgument, "split repeats must be >= 1");
  }
}

nlohmann::json json_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return value;
}

nlohmann::json to_json(const MetricReport& report) {
  nlohmann::json j = nlohmann::json::object();
  j["metric"] = report.metric;
  j["value"] = report.value ? json_number(*report.value) : nlohmann::json();
  j["sigma"] = report.sigma ? json_number(*report.sigma) : nlohmann::json();
  j["sigma_policy"] = report.sigma_policy
                          ? nlohmann::json(std::string(
                                to_string(*report.sigma_policy)))
                          : nlohmann::json();
  if (report.split) {
    j["split"] = {{"mode", std::string(to_string(report.split->mode))},
                  {"seed", report.split->seed},
                  {"repeats", report.split->pair_count()}};
  } else {
    j["split"] = nullptr;
  }
  j["classes"] = report.classes;
  nlohmann::json per_class = nlohmann::json::object();
  for (const auto& [label, v] : report.per_class) {
    per_class[label] = json_number(v);
  }
  j["per_class"] = per_class;
  j["skipped"] = report.skipped;
  j["inputs"] = report.inputs;
  if (!report.warnings.empty()) j["warnings"] = report.warnings;
  for (const auto& [key, v] : report.extra.items()) j[key] = v;
  return j;
}

std::string format_report(const MetricReport& report, ReportFormat format) {
  const auto j = to_json(report);
  if (format == ReportFormat::kJson) return j.dump(2) + "\n";
  std::vector<std::pair<std::string, std::string>> rows;
  flatten("", j, rows);
  std::string out = "key,value\n";
  for (const auto& [key, value] : rows) {
    out += csv_escape(key) + "," + csv_escape(value) + "\n";
  }
  return out;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw Error(ErrorCode::kIo, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

std::string file_sha256(const std::filesystem::path& path) {
  return sha256_hex(read_file_bytes(path));
}

}  // namespace evalkit
