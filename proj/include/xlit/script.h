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

// Unicode script registry for the Indic blocks used by the toolkit:
// per-code-point classification, canonical normalization, and the
// same-offset Brahmi <-> Devanagari unification.

#ifndef XLIT_SCRIPT_H_
#define XLIT_SCRIPT_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace xlit::script {

enum class Script : std::uint8_t {
  kDevanagari,
  kBengali,
  kGurmukhi,
  kGujarati,
  kOriya,
  kTamil,
  kTelugu,
  kKannada,
  kMalayalam,
  kSinhala,
  kLatin,
  kArabic,
  kMeetei,
};

inline constexpr std::size_t kScriptCount = 13;

std::string_view to_string(Script script);
std::optional<Script> parse_script(std::string_view name);

enum class CharClass : std::uint8_t {
  kIndependentVowel,
  kVowelSign,
  kConsonant,
  kVirama,
  kNukta,
  kDigit,
  kSign,
  kWhitespace,
  kOther,
};

std::string_view to_string(CharClass cls);
std::optional<CharClass> parse_char_class(std::string_view name);

// An ISO 639-2 language code paired with its default script.
struct LanguageTag {
  std::string code;
  Script script = Script::kLatin;

  bool operator==(const LanguageTag&) const = default;
  auto operator<=>(const LanguageTag&) const = default;

  // Looks up one of the built-in languages (the 21 Indic languages plus
  // "eng"). Throws Error(kInvalidInput) for anything else.
  static LanguageTag of(std::string_view code);

  // Builds a tag for a synthetic language (tests, experiments). The code
  // must be three lowercase ASCII letters.
  static LanguageTag custom(std::string_view code, Script script);
};

// Built-in language codes, sorted.
const std::vector<std::string>& builtin_languages();

struct ScriptSpec {
  Script id = Script::kLatin;
  char32_t first = 0;
  char32_t last = 0;
  bool brahmi = false;
  // Indexed by (code point - first).
  std::vector<CharClass> classes;
  std::vector<std::uint8_t> mappable;
  std::vector<std::uint8_t> assigned;

  bool contains(char32_t cp) const { return cp >= first && cp <= last; }
  std::size_t size() const { return static_cast<std::size_t>(last - first) + 1; }
};

struct TranslationReport {
  std::size_t mapped = 0;
  // In-block code points with no counterpart; passed through unchanged.
  std::size_t unmapped = 0;
  // Code points outside the source block (spaces, digits, Latin, ...).
  std::size_t foreign = 0;
};

class ScriptRegistry {
 public:
  // The registry compiled from data/script_registry.tsv.
  static const ScriptRegistry& builtin();

  // Parses the versioned registry format; throws ParseError.
  static ScriptRegistry parse(std::string_view text);
  static ScriptRegistry load(const std::filesystem::path& path);
  std::string serialize() const;

  int version() const { return version_; }
  bool has(Script script) const;
  // Throws Error(kUnregisteredScript).
  const ScriptSpec& spec(Script script) const;
  std::vector<Script> scripts() const;

  CharClass classify(char32_t cp, Script script) const;
  // The registered block containing cp, if any.
  std::optional<Script> block_of(char32_t cp) const;

 private:
  int version_ = 0;
  std::array<std::optional<ScriptSpec>, kScriptCount> specs_;
};

// Canonical composition (NFC) with zero-width joiners, non-joiners and
// other invisible formatting characters removed. Idempotent.
std::string normalize(std::string_view text);

CharClass classify_char(char32_t cp, Script script,
                        const ScriptRegistry& registry = ScriptRegistry::builtin());

// Translates a Brahmi-derived script into Devanagari by block offset.
// Throws Error(kUnsupportedScript) for non-Brahmi scripts.
std::string to_devanagari(std::string_view text, Script from,
                          TranslationReport* report = nullptr,
                          const ScriptRegistry& registry = ScriptRegistry::builtin());
std::string from_devanagari(std::string_view text, Script to,
                            TranslationReport* report = nullptr,
                            const ScriptRegistry& registry = ScriptRegistry::builtin());

// The consonants of a word, in order. Vowels, matras, virama, nukta and
// signs (anusvara, visarga, candrabindu) are dropped.
std::u32string consonant_skeleton(std::string_view word, Script script,
                                  const ScriptRegistry& registry = ScriptRegistry::builtin());

// True when every scalar of word is either inside the script's block or is
// an ASCII digit. Used to reject mixed-script tokens.
bool is_in_script(std::u32string_view word, Script script,
                  const ScriptRegistry& registry = ScriptRegistry::builtin());

}  // namespace xlit::script

#endif  // XLIT_SCRIPT_H_
