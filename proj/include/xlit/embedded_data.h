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

#ifndef XLIT_EMBEDDED_DATA_H_
#define XLIT_EMBEDDED_DATA_H_

#include <map>
#include <string>
#include <string_view>

namespace xlit {

// Data files shipped under data/, compiled into the library. Keys are paths
// relative to data/, e.g. "script_registry.tsv".
const std::map<std::string, std::string_view>& embedded_files();

}  // namespace xlit

#endif  // XLIT_EMBEDDED_DATA_H_
