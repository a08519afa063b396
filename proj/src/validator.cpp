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

#include "xlit/validator.h"

#include <algorithm>

#include "xlit/embedded_data.h"
#include "xlit/text.h"
#include "xlit/utf8.h"

namespace xlit::validate {

namespace {

using script::CharClass;
using script::Script;

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

char single_char(std::string_view field, std::size_t line) {
  if (field.size() != 1) {
    throw ParseError(line, "expected a single character, got '" + std::string(field) + "'");
  }
  return field[0];
}

std::string letter_name(char32_t c) {
  return c < 0x80 ? std::string(1, static_cast<char>(c)) : utf8::encode(c);
}

bool is_nasal_sign(char32_t cp, Script script) {
  if (cp == 0x0A70) return true;  // Gurmukhi tippi
  const auto& reg = script::ScriptRegistry::builtin();
  if (!reg.has(script)) return false;
  const auto& spec = reg.spec(script);
  if (!spec.brahmi || !spec.contains(cp)) return false;
  const char32_t off = cp - spec.first;
  return (off == 0x01 || off == 0x02) &&
         spec.classes[off] == CharClass::kSign;
}

struct NativeToken {
  char32_t cp;
  bool nasal;
  bool geminate_next;
};

std::vector<NativeToken> native_tokens(const std::u32string& word,
                                       const ConsonantMapTable& table) {
  const Script script = table.lang.script;
  std::vector<CharClass> cls(word.size());
  for (std::size_t k = 0; k < word.size(); ++k) {
    cls[k] = script::classify_char(word[k], script);
  }
  std::vector<NativeToken> out;
  for (std::size_t k = 0; k < word.size(); ++k) {
    if (cls[k] == CharClass::kConsonant) {
      if (table.native_stop.count(word[k])) continue;
      std::size_t v = k + 1;
      if (v < word.size() && cls[v] == CharClass::kNukta) ++v;
      const bool gem = v + 1 < word.size() && cls[v] == CharClass::kVirama &&
                       word[v + 1] == word[k];
      out.push_back({word[k], false, gem});
    } else if (cls[k] == CharClass::kSign && is_nasal_sign(word[k], script)) {
      out.push_back({word[k], true, false});
    }
  }
  return out;
}

ConsonantMapTable convert_table(const ConsonantMapTable& src,
                                const script::LanguageTag& lang, bool to_deva) {
  ConsonantMapTable out;
  out.lang = lang;
  out.stop_list = src.stop_list;
  out.nasal_letters = src.nasal_letters;
  auto convert = [&](const std::string& s) -> std::optional<std::string> {
    script::TranslationReport report;
    std::string r = to_deva ? script::to_devanagari(s, src.lang.script, &report)
                            : script::from_devanagari(s, lang.script, &report);
    if (report.unmapped > 0 || report.foreign > 0) return std::nullopt;
    return script::normalize(r);
  };
  for (const auto& [letter, alts] : src.mapping) {
    std::vector<std::string> conv;
    for (const auto& alt : alts) {
      if (auto c = convert(alt)) {
        if (std::find(conv.begin(), conv.end(), *c) == conv.end()) conv.push_back(*c);
      }
    }
    if (!conv.empty()) out.mapping[letter] = std::move(conv);
  }
  for (char32_t cp : src.native_stop) {
    if (auto c = convert(utf8::encode(cp))) {
      const auto cps = utf8::decode(*c);
      if (cps.size() == 1) out.native_stop.insert(cps[0]);
    }
  }
  return out;
}

}  // namespace

UnknownLetter::UnknownLetter(char32_t letter)
    : Error(ErrorCode::kUnknownLetter,
            "letter '" + letter_name(letter) +
                "' is neither a vowel, stop-listed, nor mapped"),
      letter_(letter) {}

ConsonantMapTable ConsonantMapTable::parse(std::string_view text,
                                           script::LanguageTag lang) {
  ConsonantMapTable t;
  t.lang = std::move(lang);
  std::size_t line_no = 0;
  for (std::string_view line : text::split_lines(text)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = text::split(line, '\t');
    if (fields[0] == "#stop") {
      t.stop_list.clear();
      for (std::size_t i = 1; i < fields.size(); ++i) {
        t.stop_list.insert(single_char(fields[i], line_no));
      }
      continue;
    }
    if (fields[0] == "#native-stop") {
      t.native_stop.clear();
      for (std::size_t i = 1; i < fields.size(); ++i) {
        const auto cps = utf8::decode(script::normalize(fields[i]));
        if (cps.size() != 1) throw ParseError(line_no, "native stop entries are single characters");
        t.native_stop.insert(cps[0]);
      }
      continue;
    }
    if (fields[0] == "#nasal") {
      t.nasal_letters.clear();
      for (std::size_t i = 1; i < fields.size(); ++i) {
        t.nasal_letters.insert(single_char(fields[i], line_no));
      }
      continue;
    }
    if (line.front() == '#') continue;
    const char letter = single_char(fields[0], line_no);
    if (letter < 'a' || letter > 'z') {
      throw ParseError(line_no, "mapping keys must be lowercase Latin letters");
    }
    if (fields.size() < 2) throw ParseError(line_no, "letter without alternatives");
    std::vector<std::string> alts;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      if (fields[i].empty()) throw ParseError(line_no, "empty alternative");
      std::string alt = script::normalize(fields[i]);
      if (std::find(alts.begin(), alts.end(), alt) == alts.end()) alts.push_back(alt);
    }
    if (t.mapping.count(letter)) throw ParseError(line_no, "duplicate letter");
    t.mapping[letter] = std::move(alts);
  }
  return t;
}

std::string ConsonantMapTable::serialize() const {
  std::string out = "#stop";
  for (char c : stop_list) out += '\t' + std::string(1, c);
  out += "\n#native-stop";
  for (char32_t c : native_stop) out += '\t' + utf8::encode(c);
  out += "\n#nasal";
  for (char c : nasal_letters) out += '\t' + std::string(1, c);
  out += '\n';
  for (const auto& [letter, alts] : mapping) {
    out += letter;
    for (const auto& a : alts) out += '\t' + a;
    out += '\n';
  }
  return out;
}

void ConsonantMapTable::apply_overlay(const ConsonantMapTable& overlay) {
  if (!overlay.stop_list.empty()) stop_list = overlay.stop_list;
  if (!overlay.native_stop.empty()) native_stop = overlay.native_stop;
  if (!overlay.nasal_letters.empty()) nasal_letters = overlay.nasal_letters;
  for (const auto& [letter, alts] : overlay.mapping) mapping[letter] = alts;
}

void ConsonantMapTable::check() const {
  for (const auto& [letter, alts] : mapping) {
    if (letter < 'a' || letter > 'z') {
      throw Error(ErrorCode::kInvalidConfig, "mapping key is not a lowercase letter");
    }
    if (stop_list.count(letter)) {
      throw Error(ErrorCode::kInvalidConfig,
                  std::string("letter '") + letter + "' is both mapped and stop-listed");
    }
    if (alts.empty()) {
      throw Error(ErrorCode::kInvalidConfig,
                  std::string("letter '") + letter + "' has no alternatives");
    }
  }
}

ConsonantMapTable kannada_table() {
  static const ConsonantMapTable table = [] {
    auto t = ConsonantMapTable::parse(embedded_files().at("consonants/kan.tsv"),
                                      script::LanguageTag::of("kan"));
    t.check();
    return t;
  }();
  return table;
}

ConsonantMapTable master_table() {
  static const ConsonantMapTable table = [] {
    auto t = convert_table(kannada_table(),
                           script::LanguageTag::custom("dev", Script::kDevanagari), true);
    t.check();
    return t;
  }();
  return table;
}

ConsonantMapTable derive_table(const ConsonantMapTable& master,
                               const script::LanguageTag& lang) {
  if (!script::ScriptRegistry::builtin().spec(lang.script).brahmi) {
    throw Error(ErrorCode::kUnsupportedScript,
                "no consonant table for script '" +
                    std::string(script::to_string(lang.script)) + "'");
  }
  return convert_table(master, lang, false);
}

ConsonantMapTable builtin_table(const script::LanguageTag& lang) {
  if (lang.code == "kan") return kannada_table();
  ConsonantMapTable t = derive_table(master_table(), lang);
  const auto& files = embedded_files();
  if (auto it = files.find("consonants/overlay/" + lang.code + ".tsv"); it != files.end()) {
    t.apply_overlay(ConsonantMapTable::parse(it->second, lang));
  }
  t.check();
  return t;
}

std::string roman_skeleton(std::string_view roman, const ConsonantMapTable& table) {
  std::string out;
  for (char32_t cp : utf8::decode(roman)) {
    if (cp >= 'A' && cp <= 'Z') cp = cp - 'A' + 'a';
    if (cp < 0x80) {
      const char c = static_cast<char>(cp);
      if (is_vowel(c) || table.stop_list.count(c)) continue;
      if (table.mapping.count(c)) {
        out.push_back(c);
        continue;
      }
    }
    throw UnknownLetter(cp);
  }
  return out;
}

Validator::Validator(ConsonantMapTable table, ValidatorOptions options)
    : table_(std::move(table)), options_(options) {
  table_.check();
  for (const auto& [letter, alts] : table_.mapping) {
    auto& compiled = alternatives_[letter];
    for (const auto& alt : alts) {
      std::u32string skel = script::consonant_skeleton(alt, table_.lang.script);
      std::erase_if(skel, [&](char32_t c) { return table_.native_stop.count(c) > 0; });
      if (std::find(compiled.begin(), compiled.end(), skel) == compiled.end()) {
        compiled.push_back(std::move(skel));
      }
    }
  }
}

ValidationResult Validator::validate(std::string_view roman,
                                     std::string_view native) const {
  ValidationResult result;
  result.roman_skeleton = roman_skeleton(roman, table_);
  const std::u32string word = utf8::decode(script::normalize(native));
  if (word.empty()) throw Error(ErrorCode::kInvalidInput, "empty native word");

  const std::vector<NativeToken> tokens = native_tokens(word, table_);
  const std::size_t n = tokens.size();
  std::vector<std::size_t> cons_at(n + 1, 0);
  for (std::size_t j = 0; j < n; ++j) {
    cons_at[j + 1] = cons_at[j] + (tokens[j].nasal ? 0 : 1);
    if (!tokens[j].nasal) result.native_skeleton.push_back(tokens[j].cp);
  }

  const std::string& rs = result.roman_skeleton;
  const std::size_t m = rs.size();
  struct Cell {
    bool reached = false;
    std::size_t prev_i = 0;
    std::size_t prev_j = 0;
  };
  std::vector<Cell> dp((m + 1) * (n + 1));
  auto at = [&](std::size_t i, std::size_t j) -> Cell& { return dp[i * (n + 1) + j]; };
  auto reach = [&](std::size_t i, std::size_t j, std::size_t pi, std::size_t pj) {
    Cell& c = at(i, j);
    if (!c.reached) c = {true, pi, pj};
  };
  at(0, 0).reached = true;
  std::size_t furthest = 0;
  for (std::size_t i = 0; i <= m; ++i) {
    for (std::size_t j = 0; j <= n; ++j) {
      if (!at(i, j).reached) continue;
      furthest = std::max(furthest, i);
      if (j < n && tokens[j].nasal) reach(i, j + 1, i, j);
      if (i == m) continue;
      const char letter = rs[i];
      if (j < n && tokens[j].nasal && table_.nasal_letters.count(letter)) {
        reach(i + 1, j + 1, i, j);
      }
      for (const auto& alt : alternatives_.at(letter)) {
        if (j + alt.size() > n) continue;
        bool ok = true;
        for (std::size_t k = 0; k < alt.size() && ok; ++k) {
          ok = !tokens[j + k].nasal && tokens[j + k].cp == alt[k];
        }
        if (ok) reach(i + 1, j + alt.size(), i, j);
        if (options_.geminate_leniency && alt.size() == 1 && j + 1 < n &&
            tokens[j].geminate_next && !tokens[j].nasal && tokens[j].cp == alt[0]) {
          reach(i + 1, j + 2, i, j);
        }
      }
    }
  }

  result.valid = at(m, n).reached;
  if (!result.valid) {
    result.mismatch_index = furthest;
    return result;
  }
  std::size_t i = m, j = n;
  while (i > 0 || j > 0) {
    const Cell& c = at(i, j);
    if (c.prev_i != i) {
      result.matches.push_back({c.prev_i, cons_at[c.prev_j], cons_at[j]});
    }
    i = c.prev_i;
    j = c.prev_j;
  }
  std::reverse(result.matches.begin(), result.matches.end());
  return result;
}

ValidationResult validate_pair(std::string_view roman, std::string_view native,
                               const ConsonantMapTable& table,
                               const ValidatorOptions& options) {
  return Validator(table, options).validate(roman, native);
}

}  // namespace xlit::validate
