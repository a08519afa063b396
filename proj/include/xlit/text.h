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

#ifndef XLIT_TEXT_H_
#define XLIT_TEXT_H_

#include <string>
#include <string_view>
#include <vector>

namespace xlit::text {

// Splits on '\n', dropping a trailing '\r' from each line (CRLF input).
// A final empty segment after the last newline is not returned.
std::vector<std::string_view> split_lines(std::string_view text);

std::vector<std::string_view> split(std::string_view line, char sep);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

// Shortest round-trip decimal form of a double.
std::string format_double(double value);

}  // namespace xlit::text

#endif  // XLIT_TEXT_H_
