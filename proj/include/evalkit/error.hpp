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

#ifndef EVALKIT_ERROR_HPP_
#define EVALKIT_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace evalkit {

// Every failure the library reports on bad input carries one of these codes.
// Callers (the CLI in particular) map them to exit statuses; tests assert on
// them instead of matching message text.
enum class ErrorCode {
  kIo,
  kBadMagic,
  kBadVersion,
  kBadDtype,
  kTruncated,
  kTrailingData,
  kNonFinite,
  kDuplicateId,
  kMalformedRecord,
  kDuplicateFrame,
  kMissingSample,
  kDimensionMismatch,
  kInvalidArgument,
  kTooFewSamples,
  kDegenerateBandwidth,
  kIndeterminateDiversity,
  kUntaggedSample,
  kIllFormedCovariance,
  kNumerical,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace evalkit

#endif  // EVALKIT_ERROR_HPP_
