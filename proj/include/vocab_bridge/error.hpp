// Copyright 2026 The vocab-bridge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vocab_bridge {

/// Failure categories raised by library operations. The CLI maps every code
/// except kUsage to exit status 2.
enum class ErrorCode {
  kIo,
  kMalformedHeader,
  kArityMismatch,
  kNonFiniteValue,
  kCountMismatch,
  kInvalidToken,
  kDuplicateToken,
  kZeroRow,
  kMissingToken,
  kEmptyCorpus,
  kInvalidArgument,
  kMalformedLine,
  kTooFewPairs,
  kDegenerateInput,
  kDimMismatch,
  kKTooLarge,
  kNotOrthogonal,
  kEmptyEvalDict,
  kEmptyIntersection,
  kEmptyStage1Dict,
  kEmptyStage2Anchors,
  kEmptyAnchorPool,
  kTokenNotFound,
  kMissingAnchor,
  kMissingAssignment,
  kDuplicateNewToken,
  kCorpusMismatch,
  kUsage,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kMalformedHeader: return "MalformedHeader";
    case ErrorCode::kArityMismatch: return "ArityMismatch";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kCountMismatch: return "CountMismatch";
    case ErrorCode::kInvalidToken: return "InvalidToken";
    case ErrorCode::kDuplicateToken: return "DuplicateToken";
    case ErrorCode::kZeroRow: return "ZeroRow";
    case ErrorCode::kMissingToken: return "MissingToken";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kTooFewPairs: return "TooFewPairs";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kKTooLarge: return "KTooLarge";
    case ErrorCode::kNotOrthogonal: return "NotOrthogonal";
    case ErrorCode::kEmptyEvalDict: return "EmptyEvalDict";
    case ErrorCode::kEmptyIntersection: return "EmptyIntersection";
    case ErrorCode::kEmptyStage1Dict: return "EmptyStage1Dict";
    case ErrorCode::kEmptyStage2Anchors: return "EmptyStage2Anchors";
    case ErrorCode::kEmptyAnchorPool: return "EmptyAnchorPool";
    case ErrorCode::kTokenNotFound: return "TokenNotFound";
    case ErrorCode::kMissingAnchor: return "MissingAnchor";
    case ErrorCode::kMissingAssignment: return "MissingAssignment";
    case ErrorCode::kDuplicateNewToken: return "DuplicateNewToken";
    case ErrorCode::kCorpusMismatch: return "CorpusMismatch";
    case ErrorCode::kUsage: return "Usage";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable code plus the offending line
/// number, token, or list position when one applies.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt,
        std::optional<std::string> token = std::nullopt,
        std::optional<std::size_t> position = std::nullopt)
      : std::runtime_error(format(code, message, line)),
        code_(code),
        line_(line),
        token_(std::move(token)),
        position_(position) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }
  const std::optional<std::string>& token() const noexcept { return token_; }
  std::optional<std::size_t> position() const noexcept { return position_; }

 private:
  static std::string format(ErrorCode code, const std::string& message,
                            std::optional<std::size_t> line) {
    std::string out(to_string(code));
    if (line) out += "(line " + std::to_string(*line) + ")";
    out += ": ";
    out += message;
    return out;
  }

  ErrorCode code_;
  std::optional<std::size_t> line_;
  std::optional<std::string> token_;
  std::optional<std::size_t> position_;
};

}  // namespace vocab_bridge
