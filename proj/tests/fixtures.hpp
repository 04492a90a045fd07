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

#ifndef EVALKIT_TESTS_FIXTURES_HPP_
#define EVALKIT_TESTS_FIXTURES_HPP_

#include <string>
#include <vector>

#include "evalkit/embedding_store.hpp"
#include "evalkit/kernel_mmd.hpp"
#include "oracles.hpp"

namespace evalkit::testing {

inline PointSet to_points(const Rows& rows) {
  std::vector<double> values;
  for (const auto& r : rows) values.insert(values.end(), r.begin(), r.end());
  return PointSet(rows.empty() ? 1 : rows[0].size(), std::move(values));
}

inline std::vector<std::string> numbered_ids(std::size_t n,
                                             const std::string& prefix = "s") {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) {
    std::string num = std::to_string(i);
    ids.push_back(prefix + std::string(6 - std::min<std::size_t>(6, num.size()), '0') + num);
  }
  return ids;
}

inline EmbeddingSet make_set(const Rows& rows, std::vector<std::string> ids) {
  std::vector<float> values;
  for (const auto& r : rows) {
    for (double v : r) values.push_back(static_cast<float>(v));
  }
  return EmbeddingSet(rows.empty() ? 1 : rows[0].size(), std::move(ids),
                      std::move(values));
}

template <std::size_t N>
EmbeddingSet make_set(const Rows& rows, const char (&prefix)[N]) {
  return make_set(rows, numbered_ids(rows.size(), prefix));
}

inline EmbeddingSet make_set(const Rows& rows) { return make_set(rows, "s"); }

// Rows quantized to 32-bit, as an EmbeddingSet would hold them.
inline Rows quantize(const Rows& rows) {
  Rows out = rows;
  for (auto& r : out) {
    for (auto& v : r) v = static_cast<double>(static_cast<float>(v));
  }
  return out;
}

}  // namespace evalkit::testing

#endif  // EVALKIT_TESTS_FIXTURES_HPP_
