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

#include <random>

#include "doctest.h"
#include "xlit/error.h"
#include "xlit/script.h"
#include "xlit/utf8.h"

using namespace xlit;
using namespace xlit::script;

namespace {

std::u32string U(std::string_view s) { return utf8::decode(s); }

const std::vector<Script> kBrahmi = {
    Script::kDevanagari, Script::kBengali, Script::kGurmukhi,
    Script::kGujarati,   Script::kOriya,   Script::kTamil,
    Script::kTelugu,     Script::kKannada, Script::kMalayalam};

}  // namespace

TEST_CASE("normalize composes canonical equivalents") {
  // NA + NUKTA composes to NNNA; e + combining acute to e-acute.
  CHECK(normalize(utf8::encode(U"\u0928\u093C")) == utf8::encode(U"\u0929"));
  CHECK(normalize(utf8::encode(U"e\u0301")) == utf8::encode(U"\u00E9"));
  // Bengali O is the composition of E and AA signs.
  CHECK(normalize(utf8::encode(U"\u0995\u09C7\u09BE")) == utf8::encode(U"\u0995\u09CB"));
  // QA is a composition exclusion: it normalizes to KA + NUKTA.
  CHECK(normalize(utf8::encode(U"\u0958")) == utf8::encode(U"\u0915\u093C"));
}

TEST_CASE("normalize strips invisibles and is idempotent") {
  CHECK(normalize("ಕನ್ನಡ") == "ಕನ್ನಡ");
  CHECK(normalize("नम" + utf8::encode(U"\u200D") + "स्ते") == "नमस्ते");
  CHECK(normalize(utf8::encode(U"\u0915\u200C\u0937\uFEFF")) == "कष");
  CHECK(normalize("") == "");

  std::mt19937 rng(7);
  const std::vector<char32_t> pool = {0x0915, 0x093C, 0x094D, 0x093E, 0x200D, 0x200C,
                                      0x09C7, 0x09BE, 0x0995, 0x0065, 0x0301, 0x0327,
                                      0x0B95, 0x0BCA, 0x0BC6, 0x0BBE, 0x0958, 0x0020};
  for (int trial = 0; trial < 500; ++trial) {
    std::u32string s;
    const int len = static_cast<int>(rng() % 12);
    for (int k = 0; k < len; ++k) s.push_back(pool[rng() % pool.size()]);
    const std::string once = normalize(utf8::encode(s));
    CHECK(normalize(once) == once);
    CHECK(once.find(utf8::encode(U"\u200D")) == std::string::npos);
  }
}

TEST_CASE("classify_char follows the Unicode charts") {
  CHECK(classify_char(U'क', Script::kDevanagari) == CharClass::kConsonant);
  CHECK(classify_char(U'ा', Script::kDevanagari) == CharClass::kVowelSign);
  CHECK(classify_char(U'7', Script::kLatin) == CharClass::kDigit);
  CHECK(classify_char(U'अ', Script::kDevanagari) == CharClass::kIndependentVowel);
  CHECK(classify_char(0x094D, Script::kDevanagari) == CharClass::kVirama);
  CHECK(classify_char(0x093C, Script::kDevanagari) == CharClass::kNukta);
  CHECK(classify_char(0x0902, Script::kDevanagari) == CharClass::kSign);
  CHECK(classify_char(0x0903, Script::kDevanagari) == CharClass::kSign);
  CHECK(classify_char(0x0901, Script::kDevanagari) == CharClass::kSign);
  CHECK(classify_char(U' ', Script::kKannada) == CharClass::kWhitespace);
  CHECK(classify_char(U'x', Script::kKannada) == CharClass::kOther);
  CHECK(classify_char(0x0D7B, Script::kMalayalam) == CharClass::kConsonant);
  CHECK(classify_char(0x0BCD, Script::kTamil) == CharClass::kVirama);
}

TEST_CASE("classification is total over every registered block") {
  const auto& reg = ScriptRegistry::builtin();
  CHECK(reg.scripts().size() == kScriptCount);
  for (Script s : reg.scripts()) {
    const auto& spec = reg.spec(s);
    for (char32_t cp = spec.first; cp <= spec.last; ++cp) {
      CHECK_NOTHROW(classify_char(cp, s));
    }
  }
}

TEST_CASE("unregistered script is an error") {
  const auto reg = ScriptRegistry::parse(
      "@version\t1\n@script\tdevanagari\t0900\t097F\tbrahmi\n0915\tdevanagari\tConsonant\t1\n");
  CHECK(reg.classify(0x0915, Script::kDevanagari) == CharClass::kConsonant);
  try {
    reg.classify(0x0C95, Script::kKannada);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnregisteredScript);
  }
}

TEST_CASE("registry parser rejects malformed data with line numbers") {
  auto line_of = [](std::string_view text) -> std::size_t {
    try {
      ScriptRegistry::parse(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("@version\t1\n@script\tdevanagari\t0900\t097F\tbrahmi\n"
                "@script\tbengali\t0950\t09FF\tbrahmi\n") == 3);
  CHECK(line_of("@version\t1\n@script\tdevanagari\t0900\t097F\tbrahmi\n"
                "0915\tdevanagari\tConsonantish\t1\n") == 3);
  CHECK(line_of("@version\t1\n@script\tlatin\t0000\t024F\tother\n"
                "0061\tlatin\tIndependentVowel\t1\n") == 3);
  CHECK(line_of("@version\t2\n") == 1);
}

TEST_CASE("registry serialization round-trips") {
  const auto& reg = ScriptRegistry::builtin();
  CHECK(reg.version() == 1);
  const std::string text = reg.serialize();
  CHECK(ScriptRegistry::parse(text).serialize() == text);
}

TEST_CASE("script unification by block offset") {
  CHECK(to_devanagari("ಕ", Script::kKannada) == "क");
  CHECK(to_devanagari("ಕನ್ನಡ", Script::kKannada) == "कन्नड");
  CHECK(to_devanagari("नमस्ते", Script::kDevanagari) == "नमस्ते");
  CHECK(from_devanagari("कन्नड", Script::kKannada) == "ಕನ್ನಡ");

  TranslationReport report;
  // Malayalam chillu NN sits outside the coordinated range.
  const std::string out = to_devanagari("ൺa ", Script::kMalayalam, &report);
  CHECK(out == "ൺa ");
  CHECK(report.unmapped == 1);
  CHECK(report.foreign == 2);
  CHECK(report.mapped == 0);
}

TEST_CASE("unification rejects non-Brahmi scripts") {
  for (Script s : {Script::kArabic, Script::kMeetei, Script::kLatin, Script::kSinhala}) {
    try {
      to_devanagari("x", s);
      FAIL("expected UnsupportedScript");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kUnsupportedScript);
    }
    CHECK_THROWS_AS(from_devanagari("क", s), Error);
  }
}

TEST_CASE("round trip over every mappable code point") {
  const auto& reg = ScriptRegistry::builtin();
  std::size_t checked = 0;
  for (Script s : kBrahmi) {
    const auto& spec = reg.spec(s);
    for (std::size_t off = 0; off < spec.size(); ++off) {
      if (!spec.mappable[off]) continue;
      const std::string c = utf8::encode(spec.first + static_cast<char32_t>(off));
      const std::string deva = to_devanagari(c, s);
      CHECK(utf8::decode(deva)[0] == 0x0900 + off);
      CHECK(from_devanagari(deva, s) == c);
      ++checked;
    }
  }
  CHECK(checked > 700);
}

TEST_CASE("round trip over Kannada words") {
  std::mt19937 rng(11);
  const auto& spec = ScriptRegistry::builtin().spec(Script::kKannada);
  std::vector<char32_t> mappable;
  for (std::size_t off = 0; off < spec.size(); ++off) {
    if (spec.mappable[off]) mappable.push_back(spec.first + static_cast<char32_t>(off));
  }
  for (int trial = 0; trial < 300; ++trial) {
    std::u32string w;
    for (int k = 0, len = 1 + static_cast<int>(rng() % 8); k < len; ++k) {
      w.push_back(mappable[rng() % mappable.size()]);
    }
    const std::string word = utf8::encode(w);
    CHECK(from_devanagari(to_devanagari(word, Script::kKannada), Script::kKannada) == word);
  }
}

TEST_CASE("consonant skeleton") {
  CHECK(consonant_skeleton("ಕನ್ನಡ", Script::kKannada) == U"ಕನನಡ");
  CHECK(consonant_skeleton("आओ", Script::kDevanagari).empty());
  CHECK(consonant_skeleton(normalize("अंतर्संयुक्त"), Script::kDevanagari) == U"तरसयकत");
}

TEST_CASE("skeleton is a consonant-only subsequence") {
  std::mt19937 rng(3);
  const auto& reg = ScriptRegistry::builtin();
  for (Script s : kBrahmi) {
    const auto& spec = reg.spec(s);
    for (int trial = 0; trial < 100; ++trial) {
      std::u32string w;
      for (int k = 0, len = static_cast<int>(rng() % 10); k < len; ++k) {
        w.push_back(spec.first + static_cast<char32_t>(rng() % spec.size()));
      }
      const std::u32string skel = consonant_skeleton(utf8::encode(w), s);
      std::size_t pos = 0;
      for (char32_t c : skel) {
        pos = w.find(c, pos);
        REQUIRE(pos != std::u32string::npos);
        ++pos;
        const CharClass cls = classify_char(c, s);
        CHECK(cls != CharClass::kVowelSign);
        CHECK(cls != CharClass::kIndependentVowel);
        CHECK(cls != CharClass::kVirama);
      }
    }
  }
}

TEST_CASE("language tags") {
  CHECK(LanguageTag::of("kan").script == Script::kKannada);
  CHECK(LanguageTag::of("urd").script == Script::kArabic);
  CHECK(LanguageTag::of("mni").script == Script::kMeetei);
  CHECK(builtin_languages().size() == 22);
  CHECK_THROWS_AS(LanguageTag::of("xyz"), Error);
  CHECK(LanguageTag::custom("xaa", Script::kTamil).code == "xaa");
  CHECK_THROWS_AS(LanguageTag::custom("XA", Script::kTamil), Error);
  CHECK(is_in_script(U"ಕನ್ನಡ", Script::kKannada));
  CHECK_FALSE(is_in_script(U"abcक", Script::kDevanagari));
}
