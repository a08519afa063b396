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

// Mining transliteration pairs from multiword labels, from aligned word
// pairs of parallel corpora (EM over a transliteration / non-transliteration
// mixture), and from monolingual word lists.

#ifndef XLIT_MINER_H_
#define XLIT_MINER_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "xlit/corpus.h"
#include "xlit/model.h"
#include "xlit/validator.h"

namespace xlit::miner {

struct MiningConfig {
  double threshold = -0.35;  // keep s > threshold
  std::size_t min_common = 3;
  int em_max_iterations = 50;
  double em_tolerance = 1e-9;  // per-pair log-likelihood gain
  // Longest side of a multigram, 1 or 2. With 2, unrelated pairs are
  // explained by memorized two-character units about as well as by the
  // non-transliteration process.
  int em_max_multigram = 1;
  double posterior_cutoff = 0.5;
  // Divide each directional score by its target length + 1 before
  // averaging. Off by default.
  bool per_char_normalize = false;

  // Throws Error(kInvalidConfig).
  void validate() const;
};

// ---- labels

struct LabelPair {
  std::string roman;
  std::string native;
};

// Two columns, roman label then native label. Throws ParseError.
std::vector<LabelPair> parse_label_pairs(std::string_view text);

struct LabelReport {
  std::size_t labels = 0;
  std::size_t candidates = 0;    // size of all Cartesian products
  std::size_t malformed = 0;     // a side is not a valid word
  std::size_t rejected = 0;      // validator said no
  std::size_t accepted = 0;      // new pairs added
  std::size_t duplicates = 0;
};

// Every roman word of a label is paired with every native word; pairs the
// validator accepts are kept with source "labels". Roman words are
// lowercased; surrounding punctuation is stripped from both sides.
corpus::Lexicon mine_labels(const std::vector<LabelPair>& labels, const script::LanguageTag& lang,
                            const validate::Validator& validator, LabelReport* report = nullptr);
// Same with the built-in table for lang and geminate leniency on.
corpus::Lexicon mine_labels(const std::vector<LabelPair>& labels, const script::LanguageTag& lang,
                            LabelReport* report = nullptr);

// ---- EM over aligned word pairs

struct AlignedPair {
  std::string native;
  std::string roman;

  bool operator==(const AlignedPair&) const = default;
};

// Two columns, native then roman. Throws ParseError.
std::vector<AlignedPair> parse_aligned_pairs(std::string_view text);

// A multigram: up to em_max_multigram native characters aligned to as
// many roman characters, not both empty.
using Multigram = std::pair<std::u32string, std::u32string>;

class EMModel {
 public:
  // lambda: prior of the transliteration process.
  double lambda() const { return lambda_; }
  // Transliteration sub-model. The empty multigram is the end-of-pair event.
  const std::map<Multigram, double>& multigrams() const { return multigram_; }
  // Non-transliteration sub-model: independent character unigrams per
  // side; U+0000 is the end-of-word event.
  const std::map<char32_t, double>& native_unigrams() const { return native_uni_; }
  const std::map<char32_t, double>& roman_unigrams() const { return roman_uni_; }
  // Corpus log-likelihood before each M-step.
  const std::vector<double>& log_likelihood() const { return ll_; }
  int iterations() const { return static_cast<int>(ll_.size()); }

  double log_p_transliteration(std::string_view native, std::string_view roman) const;
  double log_p_other(std::string_view native, std::string_view roman) const;
  // Posterior of the transliteration process; 0 when neither process can
  // generate the pair.
  double posterior(std::string_view native, std::string_view roman) const;

  nlohmann::ordered_json summary() const;

 private:
  friend EMModel em_train(const std::vector<AlignedPair>& pairs, const MiningConfig& config);

  double lambda_ = 0.5;
  std::map<Multigram, double> multigram_;
  std::map<char32_t, double> native_uni_;
  std::map<char32_t, double> roman_uni_;
  std::vector<double> ll_;
  std::size_t max_multigram_ = 1;
};

// Throws Error(kInvalidInput) for an empty corpus. Stops when the gain in
// mean log-likelihood falls below the tolerance or after max iterations.
EMModel em_train(const std::vector<AlignedPair>& pairs, const MiningConfig& config = {});

struct Classified {
  std::vector<corpus::TransliterationPair> transliterations;  // posterior >= cutoff
  std::vector<AlignedPair> rejects;
};

// Accepted pairs carry the posterior as score and source "parallel".
// Pairs whose words are not valid lexicon words go to rejects.
Classified classify_pairs(const EMModel& em, const std::vector<AlignedPair>& pairs, double cutoff,
                          const script::LanguageTag& lang);

// ---- monolingual

// M_xe scores and generates native -> roman; M_ex scores roman -> native.
// Both scores are sequence log probabilities.
struct DirectionalScorers {
  std::function<double(const std::string& native, const std::string& roman)> xe;
  std::function<double(const std::string& roman, const std::string& native)> ex;
  std::function<std::string(const std::string& native)> generate;
};

// Scorers backed by two trained models for one language.
DirectionalScorers model_scorers(const model::XlitModel& native_to_roman,
                                 const model::XlitModel& roman_to_native, const std::string& lang);

// Distinct 4-grams of a word, sorted.
std::vector<std::string> four_grams(std::string_view word);

class FourGramIndex {
 public:
  explicit FourGramIndex(std::vector<std::string> words);
  const std::vector<std::string>& words() const { return words_; }
  // Indices of words sharing at least min_common distinct 4-grams with
  // query, plus the query itself when listed. Ascending.
  std::vector<std::size_t> lookup(std::string_view query, std::size_t min_common) const;

 private:
  std::vector<std::string> words_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> postings_;
  std::map<std::string, std::size_t, std::less<>> exact_;
};

struct MiningCandidate {
  std::string native;     // w_x
  std::string roman;      // w_e
  std::string generated;  // w'_e
  std::optional<double> score;
  bool accepted = false;
};

// w'_e is the generated transliteration of native. Empty (with a warning)
// when w'_e has fewer than four characters.
std::vector<MiningCandidate> gen_candidates_mono(const std::string& native,
                                                 const DirectionalScorers& scorers,
                                                 const FourGramIndex& index, std::size_t min_common);

// s = (M_xe(w_x, w_e) + M_ex(w_e, w_x)) / 2.
double score_pair_bidir(const std::string& native, const std::string& roman,
                        const DirectionalScorers& scorers, bool per_char_normalize = false);

struct MonoReport {
  std::string lang;
  std::size_t native_words = 0;
  std::size_t short_generations = 0;
  std::size_t candidates = 0;
  std::size_t scored = 0;
  std::size_t unscorable = 0;
  std::size_t accepted = 0;

  nlohmann::ordered_json to_json() const;
};

struct MonoResult {
  corpus::Lexicon lexicon;
  std::vector<MiningCandidate> candidates;
  MonoReport report;
};

MonoResult mine_monolingual(const std::vector<std::string>& native_words,
                            const std::vector<std::string>& roman_words, const script::LanguageTag& lang,
                            const DirectionalScorers& scorers, const MiningConfig& config = {});

}  // namespace xlit::miner

#endif  // XLIT_MINER_H_
