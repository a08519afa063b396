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

// Top-k accuracy over test subsets, micro-averages, system comparison and
// automatic error categories.

#ifndef XLIT_EVAL_H_
#define XLIT_EVAL_H_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "xlit/corpus.h"
#include "xlit/script.h"

namespace xlit::eval {

// Ranked candidates keyed by (lang code, roman input).
using Predictions = std::map<std::pair<std::string, std::string>, std::vector<std::string>>;

// Decoder output lines: roman, then candidate and score columns
// alternating. Throws ParseError.
Predictions parse_predictions(std::string_view text, std::string_view lang_code);

struct Cell {
  std::size_t entries = 0;
  std::size_t correct = 0;
  double accuracy() const { return entries ? static_cast<double>(correct) / static_cast<double>(entries) : 0.0; }
};

struct EvalReport {
  std::size_t k = 1;
  std::size_t missing = 0;
  // lang code -> subset -> counts
  std::map<std::string, std::map<std::string, Cell>> cells;

  nlohmann::ordered_json to_json() const;
};

// An entry is correct when any of its first k candidates equals any
// reference after normalization. Entries without a prediction count as
// wrong and are reported in one warning.
EvalReport topk_accuracy(const Predictions& predictions, const corpus::TestSet& test, std::size_t k);

// Correct over entries across a language's subsets; languages without
// entries are absent.
std::map<std::string, double> micro_average(const EvalReport& report);

// Subset rows and a Micro-avg row, one column per language plus the mean
// over languages, percentages. With other, each row is followed by a row
// for the second system labelled other_label.
std::string format_table(const EvalReport& report, const EvalReport* other = nullptr,
                         std::string_view other_label = "+rerank");

// Per (lang, subset) and micro-average accuracy of after minus before.
nlohmann::ordered_json compare_reports(const EvalReport& before, const EvalReport& after);

enum class ErrorCategory { kExact, kVowelError, kShortLongVowelSwap, kConsonantError, kOther };

std::string_view to_string(ErrorCategory category);

// Unordered short/long pairs for a script: the shipped file for the
// script when present, else the Devanagari list carried over by block
// offset, else empty.
std::set<std::pair<char32_t, char32_t>> matra_pairs(script::Script script);

// Throws Error(kInvalidInput) when either word is outside the script.
ErrorCategory categorize_error(std::string_view prediction, std::string_view reference, script::Script script);

// Counts per category for the top-1 prediction against the closest
// reference (the first whose category ranks best, Exact first).
std::map<ErrorCategory, std::size_t> error_summary(const Predictions& predictions, const corpus::TestSet& test);

}  // namespace xlit::eval

#endif  // XLIT_EVAL_H_
