//
// Copyright 2026 The lego-forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef LEGOFORGE_ERROR_HPP_
#define LEGOFORGE_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace legoforge {

enum class ErrorCode {
  kInvalidArgument,
  kUnterminatedLiteral,
  kUnterminatedComment,
  kSizeExceedsMax,
  kMissingFile,
  kMalformedRecord,
  kUnresolvedDbId,
  kEmptyDataset,
  kMissingTier,
  kUnknownAdapter,
  kIoError,
  kSchemaVersionMismatch,
  kInvalidDims,
  kRankTooLarge,
  kDuplicateName,
  kFrozenTargetError,
  kNonFiniteLoss,
  kDbUnreadable,
  kInconsistentPairSets,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported by throwing Error. The code is stable
// and intended for programmatic dispatch; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kUnterminatedLiteral: return "UnterminatedLiteral";
    case ErrorCode::kUnterminatedComment: return "UnterminatedComment";
    case ErrorCode::kSizeExceedsMax: return "SizeExceedsMax";
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kUnresolvedDbId: return "UnresolvedDbId";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kMissingTier: return "MissingTier";
    case ErrorCode::kUnknownAdapter: return "UnknownAdapter";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kSchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::kInvalidDims: return "InvalidDims";
    case ErrorCode::kRankTooLarge: return "RankTooLarge";
    case ErrorCode::kDuplicateName: return "DuplicateName";
    case ErrorCode::kFrozenTargetError: return "FrozenTargetError";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kDbUnreadable: return "DbUnreadable";
    case ErrorCode::kInconsistentPairSets: return "InconsistentPairSets";
  }
  return "Unknown";
}

}  // namespace legoforge

#endif  // LEGOFORGE_ERROR_HPP_
