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

// Language models used for data selection and reranking: an interpolated
// modified Kneser-Ney character n-gram model and a unigram word model.

#ifndef XLIT_LM_H_
#define XLIT_LM_H_

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace xlit::lm {

// word -> frequency
using WordCounts = std::map<std::string, std::uint64_t>;

// Two-column "word<TAB>count" text. Throws ParseError.
WordCounts parse_word_counts(std::string_view text);
std::string format_word_counts(const WordCounts& counts);

// Sentinels; never produced by decoding valid text.
inline constexpr char32_t kBos = 0x02;
inline constexpr char32_t kEos = 0x03;

class CharNGramLM {
 public:
  // Per-order discounts for adjusted counts 1, 2 and 3+.
  using Discounts = std::array<double, 3>;

  // Trains on words weighted by frequency. Throws Error(kInvalidConfig)
  // for order < 1 and Error(kInvalidInput) for an empty word list.
  static CharNGramLM train(const WordCounts& words, int order = 4);

  int order() const { return order_; }
  // Predictable symbols: every training character plus kEos.
  const std::vector<char32_t>& vocabulary() const { return vocab_; }
  const Discounts& discounts(int k) const { return discounts_.at(k - 1); }
  void set_discounts(int k, const Discounts& d);

  // P(next | history). Only the last order-1 symbols of history are used;
  // shorter histories are padded with kBos.
  double prob(std::u32string_view history, char32_t next) const;

  // Adjusted count of an n-gram (raw at the top order and for grams that
  // start with kBos, continuation counts otherwise).
  std::uint64_t adjusted_count(std::u32string_view context, char32_t next) const;

  std::string serialize() const;
  static CharNGramLM parse(std::string_view text);

 private:
  struct ContextStats {
    std::uint64_t total = 0;
    std::array<std::uint64_t, 3> n{};  // distinct followers with count 1, 2, 3+
    std::unordered_map<char32_t, std::uint64_t> next;
  };
  using Table = std::unordered_map<std::u32string, ContextStats>;

  void finalize();
  double prob_at(int k, std::u32string_view context, char32_t next) const;

  int order_ = 0;
  std::vector<char32_t> vocab_;
  std::vector<Discounts> discounts_;
  // tables_[k-1] holds order-k grams keyed by their (k-1)-symbol context.
  std::vector<Table> tables_;
};

// Length-normalized log probability: sum of per-character log P plus the
// end sentinel, divided by (characters + 1).
double score_word(const CharNGramLM& lm, std::string_view word);

struct BinAssignment {
  std::string word;
  double raw = 0.0;
  double scaled = 0.0;
  int bin = 0;
};

// Min-max scales the scores to [0, 1] and buckets them into deciles.
// Needs at least 10 words. Identical scores put every word in bin 0 with a
// warning.
std::vector<BinAssignment> bin_deciles(
    const std::vector<std::pair<std::string, double>>& scored);

// Draws k words spread evenly over the decile bins of the LM score, never
// returning excluded words. Deterministic for a seed. Bins short of their
// quota hand the remainder to other bins (with a warning).
std::vector<std::string> sample_diverse(const std::vector<std::string>& words,
                                        const CharNGramLM& lm, std::size_t k,
                                        const std::set<std::string>& exclude,
                                        std::uint64_t seed);

// The n most frequent words outside exclude; ties broken lexicographically.
std::vector<std::string> top_frequent(const WordCounts& words, std::size_t n,
                                      const std::set<std::string>& exclude);

class UnigramWordLM {
 public:
  static UnigramWordLM train(const WordCounts& counts);

  // log(count / N) in vocabulary, log(1 / (N + V + 1)) otherwise.
  double logprob(std::string_view word) const;
  double floor() const { return floor_; }
  std::uint64_t total() const { return total_; }
  std::size_t distinct() const { return counts_.size(); }
  const WordCounts& counts() const { return counts_; }

 private:
  WordCounts counts_;
  std::uint64_t total_ = 0;
  double floor_ = 0.0;
};

}  // namespace xlit::lm

#endif  // XLIT_LM_H_
