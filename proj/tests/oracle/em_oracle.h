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

// Enumerates every monotone multigram segmentation of a pair.

#ifndef XLIT_TESTS_ORACLE_EM_ORACLE_H_
#define XLIT_TESTS_ORACLE_EM_ORACLE_H_

#include <cmath>
#include <map>
#include <string>

#include "xlit/miner.h"
#include "xlit/utf8.h"

namespace oracle {

namespace detail {

inline double segmentations(const std::u32string& x, const std::u32string& e, std::size_t i, std::size_t j,
                            const std::map<xlit::miner::Multigram, double>& table) {
  if (i == x.size() && j == e.size()) {
    auto it = table.find({});
    return it == table.end() ? 0.0 : it->second;
  }
  double sum = 0.0;
  for (std::size_t di = 0; di <= 2 && i + di <= x.size(); ++di) {
    for (std::size_t dj = 0; dj <= 2 && j + dj <= e.size(); ++dj) {
      if (di + dj == 0) continue;
      auto it = table.find({x.substr(i, di), e.substr(j, dj)});
      if (it == table.end() || it->second == 0.0) continue;
      sum += it->second * segmentations(x, e, i + di, j + dj, table);
    }
  }
  return sum;
}

}  // namespace detail

// Sum over all segmentations of the product of multigram probabilities,
// times the end probability. Exponential; for short words only.
inline double p_transliteration(const xlit::miner::EMModel& em, const std::string& native, const std::string& roman) {
  return detail::segmentations(xlit::utf8::decode(native), xlit::utf8::decode(roman), 0, 0, em.multigrams());
}

inline double p_other(const xlit::miner::EMModel& em, const std::string& native, const std::string& roman) {
  double p = 1.0;
  for (char32_t c : xlit::utf8::decode(native)) p *= em.native_unigrams().count(c) ? em.native_unigrams().at(c) : 0.0;
  for (char32_t c : xlit::utf8::decode(roman)) p *= em.roman_unigrams().count(c) ? em.roman_unigrams().at(c) : 0.0;
  return p * em.native_unigrams().at(0) * em.roman_unigrams().at(0);
}

}  // namespace oracle

#endif  // XLIT_TESTS_ORACLE_EM_ORACLE_H_
