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

#include "xlit/corpus.h"

#include <unicode/uchar.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "xlit/error.h"
#include "xlit/log.h"
#include "xlit/random.h"
#include "xlit/text.h"
#include "xlit/utf8.h"

namespace xlit::corpus {

namespace {

constexpr std::array<std::string_view, 5> kSourceNames{"existing", "labels", "parallel",
                                                       "monolingual", "manual"};

bool is_separator(char32_t c) {
  const UChar32 u = static_cast<UChar32>(c);
  if (u_isUWhiteSpace(u) || u_ispunct(u) || u_iscntrl(u)) return true;
  switch (u_charType(u)) {
    case U_MATH_SYMBOL:
    case U_CURRENCY_SYMBOL:
    case U_MODIFIER_SYMBOL:
    case U_OTHER_SYMBOL:
      return true;
    default:
      return false;
  }
}

void count_tokens(std::string_view line, const LanguageTag& lang, lm::WordCounts& counts) {
  const std::u32string chars = utf8::decode(script::normalize(line));
  std::size_t i = 0;
  while (i < chars.size()) {
    while (i < chars.size() && is_separator(chars[i])) ++i;
    std::size_t j = i;
    while (j < chars.size() && !is_separator(chars[j])) ++j;
    if (j > i) {
      std::u32string_view tok(chars.data() + i, j - i);
      if (script::is_in_script(tok, lang.script)) ++counts[utf8::encode(tok)];
    }
    i = j;
  }
}

std::optional<double> parse_score(std::string_view s, std::size_t line) {
  if (s.empty()) return std::nullopt;
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ParseError(line, "bad score '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::string_view to_string(Source source) { return kSourceNames[static_cast<int>(source)]; }

Source parse_source(std::string_view name) {
  for (std::size_t i = 0; i < kSourceNames.size(); ++i) {
    if (kSourceNames[i] == name) return static_cast<Source>(i);
  }
  throw Error(ErrorCode::kInvalidInput, "unknown source '" + std::string(name) + "'");
}

std::string format_lang(const LanguageTag& lang) {
  try {
    if (LanguageTag::of(lang.code) == lang) return lang.code;
  } catch (const Error&) {
  }
  return lang.code + ":" + std::string(script::to_string(lang.script));
}

LanguageTag parse_lang(std::string_view field) {
  const auto colon = field.find(':');
  if (colon == std::string_view::npos) return LanguageTag::of(field);
  const auto sc = script::parse_script(field.substr(colon + 1));
  if (!sc) throw Error(ErrorCode::kInvalidInput, "unknown script in '" + std::string(field) + "'");
  return LanguageTag::custom(field.substr(0, colon), *sc);
}

bool is_valid_roman(std::string_view roman) {
  if (roman.empty()) return false;
  return std::all_of(roman.begin(), roman.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || c == '\'' || c == '-';
  });
}

bool is_valid_native(std::string_view native, const LanguageTag& lang) {
  if (native.empty()) return false;
  try {
    if (script::normalize(native) != native) return false;
    return script::is_in_script(utf8::decode(native), lang.script);
  } catch (const DecodeError&) {
    return false;
  }
}

bool Lexicon::add(TransliterationPair pair) {
  if (!is_valid_roman(pair.roman)) {
    throw Error(ErrorCode::kInvalidInput, "invalid roman word '" + pair.roman + "'");
  }
  if (!is_valid_native(pair.native, pair.lang)) {
    throw Error(ErrorCode::kInvalidInput,
                "invalid " + pair.lang.code + " word '" + pair.native + "'");
  }
  if (!triples_.emplace(pair.roman, pair.native, pair.lang.code).second) return false;
  const std::size_t idx = pairs_.size();
  roman_index_.emplace(Key{pair.lang.code, pair.roman}, idx);
  native_index_.emplace(Key{pair.lang.code, pair.native}, idx);
  pairs_.push_back(std::move(pair));
  return true;
}

bool Lexicon::contains(std::string_view roman, std::string_view native,
                       const LanguageTag& lang) const {
  return triples_.count({std::string(roman), std::string(native), lang.code}) > 0;
}

std::vector<std::size_t> Lexicon::by_roman(const LanguageTag& lang, std::string_view roman) const {
  std::vector<std::size_t> out;
  auto [lo, hi] = roman_index_.equal_range(Key{lang.code, std::string(roman)});
  for (auto it = lo; it != hi; ++it) out.push_back(it->second);
  return out;
}

std::vector<std::size_t> Lexicon::by_native(const LanguageTag& lang, std::string_view native) const {
  std::vector<std::size_t> out;
  auto [lo, hi] = native_index_.equal_range(Key{lang.code, std::string(native)});
  for (auto it = lo; it != hi; ++it) out.push_back(it->second);
  return out;
}

std::set<LanguageTag> Lexicon::languages() const {
  std::set<LanguageTag> out;
  for (const auto& p : pairs_) out.insert(p.lang);
  return out;
}

Lexicon parse_lexicon(std::string_view text) {
  Lexicon lex;
  std::size_t line_no = 0;
  std::size_t dups = 0;
  for (std::string_view line : text::split_lines(text)) {
    ++line_no;
    if (line.empty()) continue;
    auto cols = text::split(line, '\t');
    if (cols.size() != 5) {
      throw ParseError(line_no, "expected 5 tab-separated fields, got " + std::to_string(cols.size()));
    }
    TransliterationPair p;
    try {
      p.roman = std::string(cols[0]);
      p.native = std::string(cols[1]);
      p.lang = parse_lang(cols[2]);
      p.source = parse_source(cols[3]);
      p.score = parse_score(cols[4], line_no);
      if (!lex.add(std::move(p))) ++dups;
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  if (dups > 0) warn("dropped " + std::to_string(dups) + " duplicate lexicon entries");
  return lex;
}

std::string format_lexicon(const Lexicon& lexicon) {
  std::string out;
  for (const auto& p : lexicon.pairs()) {
    out += p.roman + '\t' + p.native + '\t' + format_lang(p.lang) + '\t';
    out += to_string(p.source);
    out += '\t';
    if (p.score) out += text::format_double(*p.score);
    out += '\n';
  }
  return out;
}

Lexicon read_lexicon(const std::filesystem::path& path) {
  return parse_lexicon(text::read_file(path.string()));
}

void write_lexicon(const Lexicon& lexicon, const std::filesystem::path& path) {
  text::write_file(path.string(), format_lexicon(lexicon));
}

WordList extract_wordlist(std::istream& in, const LanguageTag& lang) {
  WordList wl{lang, {}};
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    try {
      utf8::decode(line);
    } catch (const DecodeError& e) {
      throw DecodeError(offset + e.offset());
    }
    count_tokens(line, lang, wl.counts);
    offset += line.size() + 1;
  }
  return wl;
}

WordList extract_wordlist(std::string_view text, const LanguageTag& lang) {
  std::istringstream in{std::string(text)};
  return extract_wordlist(in, lang);
}

WordList filter_wordlist(const WordList& wl, std::uint64_t min_freq) {
  WordList out{wl.lang, {}};
  for (const auto& [word, freq] : wl.counts) {
    if (freq < min_freq || word.empty()) continue;
    const std::u32string chars = utf8::decode(word);
    const auto first = script::classify_char(chars[0], wl.lang.script);
    using script::CharClass;
    if (first == CharClass::kVowelSign || first == CharClass::kVirama ||
        first == CharClass::kNukta || first == CharClass::kSign) {
      continue;
    }
    const bool has_digit = std::any_of(chars.begin(), chars.end(), [&](char32_t c) {
      return script::classify_char(c, wl.lang.script) == CharClass::kDigit;
    });
    if (has_digit) continue;
    out.counts.emplace(word, freq);
  }
  return out;
}

TestSet group_testset(const Lexicon& lexicon, std::string_view subset) {
  TestSet out;
  std::map<std::pair<std::string, std::string>, std::size_t> at;
  for (const auto& p : lexicon.pairs()) {
    auto [it, fresh] = at.emplace(std::make_pair(p.lang.code, p.roman), out.size());
    if (fresh) out.push_back({p.roman, {}, p.lang, std::string(subset)});
    out[it->second].references.push_back(p.native);
  }
  return out;
}

TestSet parse_testset(std::string_view text) {
  TestSet out;
  std::size_t line_no = 0;
  for (std::string_view line : text::split_lines(text)) {
    ++line_no;
    if (line.empty()) continue;
    auto cols = text::split(line, '\t');
    if (cols.size() != 4) throw ParseError(line_no, "expected roman, references, lang, subset");
    TestEntry e;
    e.roman = std::string(cols[0]);
    e.subset = std::string(cols[3]);
    try {
      e.lang = parse_lang(cols[2]);
    } catch (const Error& err) {
      throw ParseError(line_no, err.what());
    }
    for (auto r : text::split(cols[1], '|')) {
      if (r.empty()) throw ParseError(line_no, "empty reference");
      e.references.emplace_back(r);
    }
    if (e.roman.empty()) throw ParseError(line_no, "empty input word");
    out.push_back(std::move(e));
  }
  return out;
}

std::string format_testset(const TestSet& test) {
  std::string out;
  for (const auto& e : test) {
    out += e.roman + '\t' + text::join(e.references, "|") + '\t' + format_lang(e.lang) + '\t' +
           e.subset + '\n';
  }
  return out;
}

SplitSpec make_splits(const Lexicon& full, const Lexicon& valid, const TestSet& test) {
  std::set<std::string> reserved_roman;
  std::set<std::pair<std::string, std::string>> reserved_native;
  for (const auto& p : valid.pairs()) {
    reserved_roman.insert(p.roman);
    reserved_native.emplace(p.lang.code, p.native);
  }
  for (const auto& e : test) {
    reserved_roman.insert(e.roman);
    for (const auto& r : e.references) {
      if (valid.contains(e.roman, r, e.lang)) {
        throw Error(ErrorCode::kInvalidInput,
                    "pair " + e.roman + "/" + r + " is in both validation and test sets");
      }
      reserved_native.emplace(e.lang.code, r);
    }
  }
  SplitSpec out;
  out.valid = valid;
  out.test = test;
  for (const auto& p : full.pairs()) {
    if (reserved_roman.count(p.roman) || reserved_native.count({p.lang.code, p.native})) {
      ++out.removed;
      continue;
    }
    out.train.add(p);
  }
  return out;
}

std::string split_manifest(const SplitSpec& split) {
  nlohmann::ordered_json j;
  auto per_lang = [](const Lexicon& lex) {
    std::map<std::string, std::size_t> m;
    for (const auto& p : lex.pairs()) ++m[format_lang(p.lang)];
    return m;
  };
  j["train"] = per_lang(split.train);
  j["valid"] = per_lang(split.valid);
  std::map<std::string, std::map<std::string, std::size_t>> t;
  for (const auto& e : split.test) ++t[format_lang(e.lang)][e.subset];
  j["test"] = t;
  j["removed_from_train"] = split.removed;
  return j.dump(2) + "\n";
}

void write_splits(const SplitSpec& split, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  write_lexicon(split.train, dir / "train.tsv");
  write_lexicon(split.valid, dir / "valid.tsv");
  text::write_file((dir / "test.tsv").string(), format_testset(split.test));
  text::write_file((dir / "manifest.json").string(), split_manifest(split));
}

Lexicon sample_for_review(const Lexicon& lexicon, std::size_t per_lang, std::uint64_t seed) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < lexicon.size(); ++i) {
    groups[lexicon.pairs()[i].lang.code].push_back(i);
  }
  Rng rng(seed);
  std::vector<std::size_t> picked;
  for (auto& [code, idx] : groups) {
    shuffle(idx, rng);
    idx.resize(std::min(per_lang, idx.size()));
    picked.insert(picked.end(), idx.begin(), idx.end());
  }
  std::sort(picked.begin(), picked.end());
  Lexicon out;
  for (std::size_t i : picked) out.add(lexicon.pairs()[i]);
  return out;
}

}  // namespace xlit::corpus
