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

#ifndef XLIT_UTF8_H_
#define XLIT_UTF8_H_

#include <string>
#include <string_view>
#include <vector>

namespace xlit::utf8 {

// Decodes UTF-8 into scalar values. Throws DecodeError on malformed input
// (overlongs, surrogates and out-of-range values included).
std::u32string decode(std::string_view bytes);

std::string encode(std::u32string_view text);
std::string encode(char32_t cp);

// Number of scalar values in a valid UTF-8 string.
std::size_t length(std::string_view bytes);

}  // namespace xlit::utf8

#endif  // XLIT_UTF8_H_
