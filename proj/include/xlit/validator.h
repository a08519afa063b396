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

// Rule-based transliteration checker: a roman/native pair is accepted when
// the roman consonants, mapped letter by letter through a consonant table,
// cover the native consonant skeleton exactly.

#ifndef XLIT_VALIDATOR_H_
#define XLIT_VALIDATOR_H_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "xlit/error.h"
#include "xlit/script.h"

namespace xlit::validate {

class UnknownLetter : public Error {
 public:
  explicit UnknownLetter(char32_t letter);
  char32_t letter() const noexcept { return letter_; }

 private:
  char32_t letter_;
};

struct ConsonantMapTable {
  script::LanguageTag lang;
  // Latin letter -> native alternatives (normalized). An alternative may
  // carry several consonants ("x" -> KA SA) or none (a vocalic R entry),
  // in which case the letter may match nothing.
  std::map<char, std::vector<std::string>> mapping;
  // Latin letters dropped before matching (vowels are always dropped).
  std::set<char> stop_list;
  // Native consonants dropped before matching (h/y counterparts).
  std::set<char32_t> native_stop;
  // Letters allowed to absorb an anusvara or candrabindu.
  std::set<char> nasal_letters;

  // Parses the table format. Directive lines "#stop", "#native-stop" and
  // "#nasal" hold tab-separated members; other '#' lines are comments;
  // every remaining line is "letter<TAB>alt<TAB>alt...". Throws ParseError.
  static ConsonantMapTable parse(std::string_view text, script::LanguageTag lang);
  std::string serialize() const;

  // Entries and directives present in overlay replace ours.
  void apply_overlay(const ConsonantMapTable& overlay);

  // Throws Error(kInvalidConfig) when an invariant is broken.
  void check() const;
};

inline const std::set<char>& default_stop_list() {
  static const std::set<char> s = {'a', 'e', 'i', 'o', 'u', 'h', 'y', '\'', '-'};
  return s;
}

// Table 7 (Kannada) as shipped.
ConsonantMapTable kannada_table();
// The Kannada table unified into Devanagari.
ConsonantMapTable master_table();
// Table for any Brahmi-script language: kannada_table() for kan, otherwise
// the master table carried into the language's script plus its overlay.
// Throws Error(kUnsupportedScript) for Arabic-derived and other scripts.
ConsonantMapTable builtin_table(const script::LanguageTag& lang);
// Derives a table from the master by script unification. Alternatives
// that do not survive the conversion are dropped.
ConsonantMapTable derive_table(const ConsonantMapTable& master,
                               const script::LanguageTag& lang);

struct ValidatorOptions {
  // Let one roman letter match a doubled native consonant (C virama C).
  bool geminate_leniency = false;
};

struct Match {
  std::size_t roman_index;
  // Half-open range into ValidationResult::native_skeleton.
  std::size_t native_begin;
  std::size_t native_end;
};

struct ValidationResult {
  bool valid = false;
  std::string roman_skeleton;
  std::u32string native_skeleton;
  // Index into roman_skeleton of the first letter that cannot be matched;
  // equals roman_skeleton.size() when the roman side is exhausted but
  // native consonants remain uncovered.
  std::optional<std::size_t> mismatch_index;
  // The matching found for a valid pair.
  std::vector<Match> matches;

  bool operator==(const ValidationResult& o) const {
    return valid == o.valid && roman_skeleton == o.roman_skeleton &&
           native_skeleton == o.native_skeleton && mismatch_index == o.mismatch_index;
  }
};

// Roman consonants that take part in matching. Throws UnknownLetter.
std::string roman_skeleton(std::string_view roman, const ConsonantMapTable& table);

// Precompiled matcher for one table.
class Validator {
 public:
  explicit Validator(ConsonantMapTable table, ValidatorOptions options = {});

  // Throws UnknownLetter, or Error(kInvalidInput) for an empty native word.
  ValidationResult validate(std::string_view roman, std::string_view native) const;

  const ConsonantMapTable& table() const { return table_; }
  const ValidatorOptions& options() const { return options_; }

 private:
  ConsonantMapTable table_;
  ValidatorOptions options_;
  // letter -> distinct alternative skeletons
  std::map<char, std::vector<std::u32string>> alternatives_;
};

ValidationResult validate_pair(std::string_view roman, std::string_view native,
                               const ConsonantMapTable& table,
                               const ValidatorOptions& options = {});

}  // namespace xlit::validate

#endif  // XLIT_VALIDATOR_H_
