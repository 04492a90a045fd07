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

// Counter-based random numbers (Philox4x32-10). A generator is fully
// determined by (key, stream); blocks are addressed by a 64-bit counter, so
// independent streams can be generated in any order or on any thread.

#ifndef EVALKIT_COUNTER_RNG_HPP_
#define EVALKIT_COUNTER_RNG_HPP_

#include <array>
#include <cstdint>
#include <optional>

namespace evalkit {

using PhiloxBlock = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxBlock philox4x32_10(PhiloxBlock counter, PhiloxKey key);

// Packs two 32-bit stream selectors into one stream word.
constexpr std::uint64_t make_stream(std::uint32_t hi, std::uint32_t lo) {
  return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();

  // Uniform integer on [0, bound), bound > 0. Unbiased (Lemire rejection).
  std::uint64_t bounded(std::uint64_t bound);

  // Standard normal via Box-Muller; pairs are cached.
  double normal();

 private:
  void refill();

  PhiloxKey key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  PhiloxBlock buffer_{};
  int used_ = 4;
  std::optional<double> spare_normal_;
};

}  // namespace evalkit

#endif  // EVALKIT_COUNTER_RNG_HPP_
