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

// Word lists, lexicons of transliteration pairs, test sets, and the
// overlap-free train/validation/test split.

#ifndef XLIT_CORPUS_H_
#define XLIT_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "xlit/lm.h"
#include "xlit/script.h"

namespace xlit::corpus {

using script::LanguageTag;

enum class Source { kExisting, kLabels, kParallel, kMonolingual, kManual };

std::string_view to_string(Source source);
// Throws Error(kInvalidInput).
Source parse_source(std::string_view name);

// "hin", or "xyz:devanagari" when the code is not a built-in language.
std::string format_lang(const LanguageTag& lang);
LanguageTag parse_lang(std::string_view field);

struct TransliterationPair {
  std::string roman;
  std::string native;
  LanguageTag lang;
  Source source = Source::kExisting;
  std::optional<double> score;

  bool operator==(const TransliterationPair&) const = default;
};

// Lowercase a-z plus apostrophe and hyphen, non-empty.
bool is_valid_roman(std::string_view roman);
// Normalized, non-empty, and inside the language's script block.
bool is_valid_native(std::string_view native, const LanguageTag& lang);

class Lexicon {
 public:
  // Appends a pair. Returns false (and keeps the first) for an exact
  // (roman, native, lang) duplicate. Throws Error(kInvalidInput) when a
  // side violates the pair invariants.
  bool add(TransliterationPair pair);

  const std::vector<TransliterationPair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  bool contains(std::string_view roman, std::string_view native, const LanguageTag& lang) const;

  // Indexes into pairs() for one language.
  std::vector<std::size_t> by_roman(const LanguageTag& lang, std::string_view roman) const;
  std::vector<std::size_t> by_native(const LanguageTag& lang, std::string_view native) const;
  std::set<LanguageTag> languages() const;

  bool operator==(const Lexicon& other) const { return pairs_ == other.pairs_; }

 private:
  using Key = std::pair<std::string, std::string>;  // (lang code, word)
  std::vector<TransliterationPair> pairs_;
  std::set<std::tuple<std::string, std::string, std::string>> triples_;
  std::multimap<Key, std::size_t> roman_index_;
  std::multimap<Key, std::size_t> native_index_;
};

// Tab-separated roman, native, lang, source, score (score may be empty).
// Duplicate triples are dropped with a warning; malformed lines throw
// ParseError with the 1-based line number.
Lexicon parse_lexicon(std::string_view text);
std::string format_lexicon(const Lexicon& lexicon);
Lexicon read_lexicon(const std::filesystem::path& path);
void write_lexicon(const Lexicon& lexicon, const std::filesystem::path& path);

struct WordList {
  LanguageTag lang;
  lm::WordCounts counts;

  bool operator==(const WordList&) const = default;
};

// Tokenizes on whitespace, punctuation and symbols, normalizes each token,
// keeps tokens written entirely in the language's script (digits allowed)
// and counts them. Throws DecodeError with the byte offset in the stream.
WordList extract_wordlist(std::istream& in, const LanguageTag& lang);
WordList extract_wordlist(std::string_view text, const LanguageTag& lang);

// Drops words that start with a combining mark (vowel sign, virama, nukta,
// other sign), words containing any digit, and words below min_freq.
WordList filter_wordlist(const WordList& wl, std::uint64_t min_freq = 2);

// One test entry: a roman input with every attested native reference.
struct TestEntry {
  std::string roman;
  std::vector<std::string> references;
  LanguageTag lang;
  std::string subset;

  bool operator==(const TestEntry&) const = default;
};
using TestSet = std::vector<TestEntry>;

inline const std::vector<std::string>& test_subsets() {
  static const std::vector<std::string> k{"AK-Freq", "AK-Uni", "AK-NEF", "AK-NEI", "external"};
  return k;
}

// Groups a lexicon by (lang, roman); references keep lexicon order.
TestSet group_testset(const Lexicon& lexicon, std::string_view subset);
// Tab-separated roman, references joined by '|', lang, subset.
TestSet parse_testset(std::string_view text);
std::string format_testset(const TestSet& test);

struct SplitSpec {
  Lexicon train;
  Lexicon valid;
  TestSet test;
  std::size_t removed = 0;
};

// Removes from full every pair whose roman word occurs on the roman side of
// any reserved entry (any language) or whose native word occurs on the
// native side of a reserved entry of the same language. Throws
// Error(kInvalidInput) when the reserved sets share a pair.
SplitSpec make_splits(const Lexicon& full, const Lexicon& valid, const TestSet& test);

// train.tsv, valid.tsv, test.tsv and manifest.json under dir.
void write_splits(const SplitSpec& split, const std::filesystem::path& dir);
std::string split_manifest(const SplitSpec& split);

// Uniform sample of up to n pairs per language for manual review,
// deterministic for a seed. Output keeps lexicon order.
Lexicon sample_for_review(const Lexicon& lexicon, std::size_t per_lang, std::uint64_t seed);

}  // namespace xlit::corpus

#endif  // XLIT_CORPUS_H_
