// Copyright 2026 The xlit Authors.
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

#ifndef XLIT_ERROR_H_
#define XLIT_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace xlit {

enum class ErrorCode {
  kInvalidInput,
  kInvalidConfig,
  kUnregisteredScript,
  kUnsupportedScript,
  kUnknownLetter,
  kUnknownSymbol,
  kParseError,
  kDecodeError,
  kShapeMismatch,
  kTrainingDiverged,
  kIo,
  kNotFound,
};

std::string_view to_string(ErrorCode code);

// Every failure surfaced by the library is an xlit::Error carrying a code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// A parse failure in a line-oriented file. line is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(ErrorCode::kParseError,
              "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Malformed UTF-8. offset is the byte offset of the offending sequence.
class DecodeError : public Error {
 public:
  explicit DecodeError(std::size_t offset)
      : Error(ErrorCode::kDecodeError,
              "malformed UTF-8 at byte offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace xlit

#endif  // XLIT_ERROR_H_
