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

#ifndef XLIT_LOG_H_
#define XLIT_LOG_H_

#include <functional>
#include <string>
#include <vector>

namespace xlit {

using WarningHandler = std::function<void(const std::string&)>;

// Emits a warning through the installed handler (stderr by default).
void warn(const std::string& message);

// Replaces the process-wide handler; returns the previous one.
WarningHandler set_warning_handler(WarningHandler handler);

// Collects warnings for the lifetime of the object. Not reentrant across
// threads; meant for tests and CLI reporting.
class WarningCapture {
 public:
  WarningCapture();
  ~WarningCapture();
  WarningCapture(const WarningCapture&) = delete;
  WarningCapture& operator=(const WarningCapture&) = delete;

  const std::vector<std::string>& messages() const { return messages_; }
  bool contains(const std::string& needle) const;

 private:
  std::vector<std::string> messages_;
  WarningHandler previous_;
};

}  // namespace xlit

#endif  // XLIT_LOG_H_
