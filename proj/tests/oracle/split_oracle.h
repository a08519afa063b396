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

// Brute-force overlap count between a training lexicon and the reserved
// validation/test sets: every training pair is compared with every
// reserved pair.

#ifndef XLIT_TESTS_ORACLE_SPLIT_ORACLE_H_
#define XLIT_TESTS_ORACLE_SPLIT_ORACLE_H_

#include <random>
#include <string>

#include "xlit/corpus.h"
#include "xlit/utf8.h"

namespace oracle {

inline std::size_t split_violations(const xlit::corpus::SplitSpec& s) {
  std::size_t bad = 0;
  for (const auto& t : s.train.pairs()) {
    bool hit = false;
    for (const auto& v : s.valid.pairs()) {
      if (t.roman == v.roman) hit = true;
      if (t.lang.code == v.lang.code && t.native == v.native) hit = true;
    }
    for (const auto& e : s.test) {
      if (t.roman == e.roman) hit = true;
      for (const auto& r : e.references) {
        if (t.lang.code == e.lang.code && t.native == r) hit = true;
      }
    }
    if (hit) ++bad;
  }
  return bad;
}

// Small random multi-language lexicon with many shared roman words and
// repeated native words so the split rules have something to remove.
struct RandomSplitInput {
  xlit::corpus::Lexicon full;
  xlit::corpus::Lexicon valid;
  xlit::corpus::TestSet test;
};

inline RandomSplitInput random_split_input(std::mt19937& rng, int pairs) {
  using namespace xlit;
  static const std::vector<std::pair<std::string, char32_t>> langs{
      {"hin", 0x0915}, {"tam", 0x0B95}, {"kan", 0x0C95}, {"ben", 0x0995}};
  auto roman = [&] {
    std::string w;
    const int len = 2 + rng() % 3;
    for (int i = 0; i < len; ++i) w.push_back("abkmr"[rng() % 5]);
    return w;
  };
  auto native = [&](char32_t base) {
    std::u32string w;
    const int len = 1 + rng() % 3;
    for (int i = 0; i < len; ++i) w.push_back(base + rng() % 4);
    return utf8::encode(w);
  };
  RandomSplitInput in;
  std::vector<corpus::TransliterationPair> all;
  for (int i = 0; i < pairs; ++i) {
    const auto& [code, base] = langs[rng() % langs.size()];
    corpus::TransliterationPair p{roman(), native(base), script::LanguageTag::of(code),
                                  corpus::Source::kExisting, std::nullopt};
    if (in.full.add(p)) all.push_back(p);
  }
  corpus::Lexicon test_lex;
  for (const auto& p : all) {
    const int r = rng() % 10;
    if (r == 0) in.valid.add(p);
    else if (r == 1) test_lex.add(p);
  }
  in.test = corpus::group_testset(test_lex, "AK-Freq");
  return in;
}

}  // namespace oracle

#endif  // XLIT_TESTS_ORACLE_SPLIT_ORACLE_H_
