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

#include "xlit/error.h"
#include "xlit/log.h"

#include <iostream>
#include <mutex>

namespace xlit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid_input";
    case ErrorCode::kInvalidConfig: return "invalid_config";
    case ErrorCode::kUnregisteredScript: return "unregistered_script";
    case ErrorCode::kUnsupportedScript: return "unsupported_script";
    case ErrorCode::kUnknownLetter: return "unknown_letter";
    case ErrorCode::kUnknownSymbol: return "unknown_symbol";
    case ErrorCode::kParseError: return "parse_error";
    case ErrorCode::kDecodeError: return "decode_error";
    case ErrorCode::kShapeMismatch: return "shape_mismatch";
    case ErrorCode::kTrainingDiverged: return "training_diverged";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kNotFound: return "not_found";
  }
  return "unknown";
}

namespace {

std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& handler() {
  static WarningHandler h = [](const std::string& msg) {
    std::cerr << "warning: " << msg << "\n";
  };
  return h;
}

}  // namespace

void warn(const std::string& message) {
  std::lock_guard<std::mutex> lock(handler_mutex());
  if (handler()) handler()(message);
}

WarningHandler set_warning_handler(WarningHandler h) {
  std::lock_guard<std::mutex> lock(handler_mutex());
  WarningHandler prev = std::move(handler());
  handler() = std::move(h);
  return prev;
}

WarningCapture::WarningCapture() {
  previous_ = set_warning_handler(
      [this](const std::string& msg) { messages_.push_back(msg); });
}

WarningCapture::~WarningCapture() { set_warning_handler(std::move(previous_)); }

bool WarningCapture::contains(const std::string& needle) const {
  for (const auto& m : messages_) {
    if (m.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace xlit
