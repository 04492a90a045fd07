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

#include "evalkit/error.hpp"

namespace evalkit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "io";
    case ErrorCode::kBadMagic: return "bad_magic";
    case ErrorCode::kBadVersion: return "bad_version";
    case ErrorCode::kBadDtype: return "bad_dtype";
    case ErrorCode::kTruncated: return "truncated";
    case ErrorCode::kTrailingData: return "trailing_data";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kDuplicateId: return "duplicate_id";
    case ErrorCode::kMalformedRecord: return "malformed_record";
    case ErrorCode::kDuplicateFrame: return "duplicate_frame";
    case ErrorCode::kMissingSample: return "missing_sample";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kTooFewSamples: return "too_few_samples";
    case ErrorCode::kDegenerateBandwidth: return "degenerate_bandwidth";
    case ErrorCode::kIndeterminateDiversity: return "indeterminate_diversity";
    case ErrorCode::kUntaggedSample: return "untagged_sample";
    case ErrorCode::kIllFormedCovariance: return "ill_formed_covariance";
    case ErrorCode::kNumerical: return "numerical";
  }
  return "unknown";
}

}  // namespace evalkit
