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

// Rule-based Latin to Devanagari (or Bengali) toy transliterator used to
// generate learnable training data.

#ifndef XLIT_TESTS_SUPPORT_SYNTHETIC_H_
#define XLIT_TESTS_SUPPORT_SYNTHETIC_H_

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "xlit/corpus.h"
#include "xlit/random.h"
#include "xlit/utf8.h"

namespace synth {

struct Unit {
  const char* roman;
  char32_t letter;  // Devanagari independent form
  char32_t sign;    // matra, 0 for the inherent vowel; consonants: 0
  bool vowel;
};

// Offsets chosen so that each one also exists in the Bengali block.
inline const std::vector<Unit>& units() {
  static const std::vector<Unit> u{
      {"kh", 0x0916, 0, false}, {"ch", 0x091A, 0, false}, {"sh", 0x0936, 0, false},
      {"aa", 0x0906, 0x093E, true}, {"ee", 0x0908, 0x0940, true}, {"oo", 0x090A, 0x0942, true},
      {"ai", 0x0910, 0x0948, true}, {"k", 0x0915, 0, false}, {"g", 0x0917, 0, false},
      {"j", 0x091C, 0, false}, {"t", 0x0924, 0, false}, {"d", 0x0926, 0, false},
      {"n", 0x0928, 0, false}, {"p", 0x092A, 0, false}, {"b", 0x092C, 0, false},
      {"m", 0x092E, 0, false}, {"y", 0x092F, 0, false}, {"r", 0x0930, 0, false},
      {"l", 0x0932, 0, false}, {"s", 0x0938, 0, false}, {"h", 0x0939, 0, false},
      {"a", 0x0905, 0, true}, {"i", 0x0907, 0x093F, true}, {"u", 0x0909, 0x0941, true},
      {"e", 0x090F, 0x0947, true}, {"o", 0x0913, 0x094B, true},
  };
  return u;
}

inline constexpr char32_t kVirama = 0x094D;

// Greedy longest match, then consonant clusters get a virama and the
// inherent vowel is silent. shift = 0x80 renders Bengali.
inline std::string render(std::string_view roman, char32_t shift = 0) {
  std::vector<const Unit*> seq;
  for (std::size_t i = 0; i < roman.size();) {
    const Unit* hit = nullptr;
    for (const auto& u : units()) {
      const std::string_view r(u.roman);
      if (roman.substr(i, r.size()) == r && (!hit || r.size() > std::string_view(hit->roman).size())) hit = &u;
    }
    if (!hit) return {};
    seq.push_back(hit);
    i += std::string_view(hit->roman).size();
  }
  std::u32string out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const Unit& u = *seq[i];
    if (u.vowel) {
      out.push_back(u.letter + shift);
      continue;
    }
    out.push_back(u.letter + shift);
    if (i + 1 < seq.size()) {
      const Unit& n = *seq[i + 1];
      if (!n.vowel) {
        out.push_back(kVirama + shift);
      } else {
        if (n.sign) out.push_back(n.sign + shift);
        ++i;
      }
    }
  }
  return xlit::utf8::encode(out);
}

inline std::string random_roman(xlit::Rng& rng, int min_syl = 2, int max_syl = 4) {
  static const std::vector<std::string> cons{"k", "kh", "g", "ch", "j", "t", "d", "n", "p",
                                             "b", "m", "y", "r", "l", "s", "sh", "h"};
  static const std::vector<std::string> vow{"a", "a", "a", "aa", "i", "ee", "u", "oo", "e", "ai", "o"};
  const int n = min_syl + static_cast<int>(xlit::uniform_below(rng, max_syl - min_syl + 1));
  std::string w;
  if (xlit::uniform_below(rng, 6) == 0) w += vow[xlit::uniform_below(rng, vow.size())];
  for (int s = 0; s < n; ++s) {
    w += cons[xlit::uniform_below(rng, cons.size())];
    if (xlit::uniform_below(rng, 8) == 0) w += cons[xlit::uniform_below(rng, cons.size())];
    w += vow[xlit::uniform_below(rng, vow.size())];
  }
  if (xlit::uniform_below(rng, 4) == 0) w += cons[xlit::uniform_below(rng, cons.size())];
  return w;
}

// n distinct (roman, native) pairs.
inline std::vector<std::pair<std::string, std::string>> pairs(std::size_t n, std::uint64_t seed,
                                                             char32_t shift = 0) {
  xlit::Rng rng(seed);
  std::set<std::string> seen;
  std::vector<std::pair<std::string, std::string>> out;
  while (out.size() < n) {
    std::string r = random_roman(rng);
    if (!seen.insert(r).second) continue;
    out.push_back({r, render(r, shift)});
  }
  return out;
}

inline xlit::corpus::Lexicon lexicon(const std::vector<std::pair<std::string, std::string>>& ps,
                                     std::string_view lang = "hin") {
  xlit::corpus::Lexicon lex;
  const auto tag = xlit::corpus::parse_lang(lang);
  for (const auto& [r, n] : ps) lex.add({r, n, tag, xlit::corpus::Source::kExisting, std::nullopt});
  return lex;
}

}  // namespace synth

#endif  // XLIT_TESTS_SUPPORT_SYNTHETIC_H_
