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

#include "xlit/lm.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "xlit/error.h"
#include "xlit/log.h"
#include "xlit/random.h"
#include "xlit/text.h"
#include "xlit/utf8.h"

namespace xlit::lm {

namespace {

constexpr char32_t kUnk = 0x01;

std::uint64_t parse_count(std::string_view s, std::size_t line) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
    throw ParseError(line, "bad count '" + std::string(s) + "'");
  }
  return v;
}

std::string hex(char32_t c) {
  char buf[16];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), static_cast<std::uint32_t>(c), 16);
  (void)ec;
  return std::string(buf, p);
}

char32_t parse_hex(std::string_view s, std::size_t line) {
  std::uint32_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
    throw ParseError(line, "bad code point '" + std::string(s) + "'");
  }
  return static_cast<char32_t>(v);
}

double parse_real(std::string_view s, std::size_t line) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ParseError(line, "bad number '" + std::string(s) + "'");
  }
  return v;
}

// Count-of-counts estimate; falls back to 0.5 * j when a count-of-count is
// missing or the estimate leaves (0, j).
CharNGramLM::Discounts estimate_discounts(const std::array<std::uint64_t, 4>& n) {
  CharNGramLM::Discounts d{0.5, 1.0, 1.5};
  if (n[0] == 0 || n[1] == 0) return d;
  const double y = static_cast<double>(n[0]) / (n[0] + 2.0 * n[1]);
  for (int j = 1; j <= 3; ++j) {
    if (n[j - 1] == 0 || n[j] == 0) continue;
    const double est = j - (j + 1) * y * static_cast<double>(n[j]) / n[j - 1];
    if (est > 0.0 && est < j) d[j - 1] = est;
  }
  return d;
}

}  // namespace

WordCounts parse_word_counts(std::string_view text) {
  WordCounts out;
  std::size_t line_no = 0;
  for (std::string_view line : text::split_lines(text)) {
    ++line_no;
    if (line.empty()) continue;
    auto cols = text::split(line, '\t');
    if (cols.size() != 2 || cols[0].empty()) {
      throw ParseError(line_no, "expected word<TAB>count");
    }
    out[std::string(cols[0])] += parse_count(cols[1], line_no);
  }
  return out;
}

std::string format_word_counts(const WordCounts& counts) {
  std::string out;
  for (const auto& [w, c] : counts) {
    out += w;
    out += '\t';
    out += std::to_string(c);
    out += '\n';
  }
  return out;
}

CharNGramLM CharNGramLM::train(const WordCounts& words, int order) {
  if (order < 1) {
    throw Error(ErrorCode::kInvalidConfig, "char LM order must be >= 1");
  }
  CharNGramLM lm;
  lm.order_ = order;
  const std::size_t n = static_cast<std::size_t>(order);

  std::set<char32_t> chars;
  // raw[k-1]: order-k gram -> weighted occurrence count
  std::vector<std::unordered_map<std::u32string, std::uint64_t>> raw(n);
  bool any = false;
  for (const auto& [word, freq] : words) {
    if (freq == 0 || word.empty()) continue;
    any = true;
    std::u32string s(n - 1, kBos);
    s += utf8::decode(word);
    s.push_back(kEos);
    for (std::size_t i = n - 1; i < s.size(); ++i) {
      if (s[i] != kEos) chars.insert(s[i]);
      for (std::size_t k = 1; k <= n; ++k) {
        raw[k - 1][s.substr(i + 1 - k, k)] += freq;
      }
    }
  }
  if (!any) throw Error(ErrorCode::kInvalidInput, "char LM needs a non-empty word list");

  lm.vocab_.assign(chars.begin(), chars.end());
  lm.vocab_.push_back(kUnk);
  lm.vocab_.push_back(kEos);
  std::sort(lm.vocab_.begin(), lm.vocab_.end());

  lm.tables_.assign(n, {});
  for (std::size_t k = n; k >= 1; --k) {
    std::unordered_map<std::u32string, std::uint64_t> cont;
    if (k < n) {
      for (const auto& [g, c] : raw[k]) ++cont[g.substr(1)];
    }
    for (const auto& [g, c] : raw[k - 1]) {
      std::uint64_t a = c;
      if (k < n && g[0] != kBos) a = cont.at(g);
      lm.tables_[k - 1][g.substr(0, k - 1)].next[g.back()] = a;
    }
  }
  lm.discounts_.assign(n, Discounts{});
  for (std::size_t k = 1; k <= n; ++k) {
    std::array<std::uint64_t, 4> coc{};
    for (const auto& [ctx, st] : lm.tables_[k - 1]) {
      for (const auto& [w, a] : st.next) {
        if (a >= 1 && a <= 4) ++coc[a - 1];
      }
    }
    lm.discounts_[k - 1] = estimate_discounts(coc);
  }
  lm.finalize();
  return lm;
}

void CharNGramLM::finalize() {
  for (auto& table : tables_) {
    for (auto& [ctx, st] : table) {
      st.total = 0;
      st.n = {0, 0, 0};
      for (const auto& [w, a] : st.next) {
        st.total += a;
        if (a > 0) ++st.n[std::min<std::uint64_t>(a, 3) - 1];
      }
    }
  }
}

void CharNGramLM::set_discounts(int k, const Discounts& d) {
  if (k < 1 || k > order_) throw Error(ErrorCode::kInvalidConfig, "discount order out of range");
  for (int j = 0; j < 3; ++j) {
    if (d[j] < 0.0 || d[j] > j + 1) {
      throw Error(ErrorCode::kInvalidConfig, "discount out of [0, count]");
    }
  }
  discounts_[k - 1] = d;
}

double CharNGramLM::prob_at(int k, std::u32string_view context, char32_t next) const {
  if (k == 0) return 1.0 / static_cast<double>(vocab_.size());
  const double lower = prob_at(k - 1, context.empty() ? context : context.substr(1), next);
  const auto& table = tables_[k - 1];
  auto it = table.find(std::u32string(context));
  if (it == table.end() || it->second.total == 0) return lower;
  const ContextStats& st = it->second;
  const Discounts& d = discounts_[k - 1];
  double a = 0.0;
  double disc = 0.0;
  if (auto w = st.next.find(next); w != st.next.end() && w->second > 0) {
    a = static_cast<double>(w->second);
    disc = d[std::min<std::uint64_t>(w->second, 3) - 1];
  }
  const double total = static_cast<double>(st.total);
  const double gamma = (d[0] * st.n[0] + d[1] * st.n[1] + d[2] * st.n[2]) / total;
  return std::max(a - disc, 0.0) / total + gamma * lower;
}

double CharNGramLM::prob(std::u32string_view history, char32_t next) const {
  const std::size_t want = static_cast<std::size_t>(order_ - 1);
  std::u32string ctx(want, kBos);
  const std::size_t take = std::min(want, history.size());
  for (std::size_t i = history.size() - take; i < history.size(); ++i) {
    char32_t c = history[i];
    if (c != kBos && !std::binary_search(vocab_.begin(), vocab_.end(), c)) c = kUnk;
    ctx[want - take + (i - (history.size() - take))] = c;
  }
  if (!std::binary_search(vocab_.begin(), vocab_.end(), next)) next = kUnk;
  return prob_at(order_, ctx, next);
}

std::uint64_t CharNGramLM::adjusted_count(std::u32string_view context, char32_t next) const {
  const std::size_t k = context.size() + 1;
  if (k > tables_.size()) return 0;
  auto it = tables_[k - 1].find(std::u32string(context));
  if (it == tables_[k - 1].end()) return 0;
  auto w = it->second.next.find(next);
  return w == it->second.next.end() ? 0 : w->second;
}

std::string CharNGramLM::serialize() const {
  std::ostringstream out;
  out << "xlit-charlm\t1\n";
  out << "order\t" << order_ << "\n";
  out << "vocab";
  for (char32_t c : vocab_) out << '\t' << hex(c);
  out << "\n";
  for (int k = 1; k <= order_; ++k) {
    const Discounts& d = discounts_[k - 1];
    out << "discounts\t" << k;
    for (double x : d) out << '\t' << text::format_double(x);
    out << "\n";
  }
  for (int k = 1; k <= order_; ++k) {
    // sorted for a stable artifact
    std::vector<std::pair<std::u32string, std::uint64_t>> grams;
    for (const auto& [ctx, st] : tables_[k - 1]) {
      for (const auto& [w, a] : st.next) grams.emplace_back(ctx + w, a);
    }
    std::sort(grams.begin(), grams.end());
    for (const auto& [g, a] : grams) {
      out << "gram\t" << k << '\t';
      if (g.size() == 1) out << '-';
      for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        if (i) out << ',';
        out << hex(g[i]);
      }
      out << '\t' << hex(g.back()) << '\t' << a << "\n";
    }
  }
  return out.str();
}

CharNGramLM CharNGramLM::parse(std::string_view text) {
  CharNGramLM lm;
  std::size_t line_no = 0;
  bool header = false;
  for (std::string_view line : text::split_lines(text)) {
    ++line_no;
    if (line.empty()) continue;
    auto cols = text::split(line, '\t');
    const std::string_view tag = cols[0];
    if (!header) {
      if (tag != "xlit-charlm" || cols.size() != 2 || cols[1] != "1") {
        throw ParseError(line_no, "not an xlit char LM (version 1)");
      }
      header = true;
    } else if (tag == "order" && cols.size() == 2) {
      lm.order_ = static_cast<int>(parse_count(cols[1], line_no));
      if (lm.order_ < 1) throw ParseError(line_no, "order must be >= 1");
      lm.tables_.assign(lm.order_, {});
      lm.discounts_.assign(lm.order_, Discounts{0.5, 1.0, 1.5});
    } else if (tag == "vocab") {
      for (std::size_t i = 1; i < cols.size(); ++i) lm.vocab_.push_back(parse_hex(cols[i], line_no));
      std::sort(lm.vocab_.begin(), lm.vocab_.end());
    } else if (tag == "discounts" && cols.size() == 5 && lm.order_ > 0) {
      const std::uint64_t k = parse_count(cols[1], line_no);
      if (k < 1 || k > static_cast<std::uint64_t>(lm.order_)) throw ParseError(line_no, "bad order");
      for (int j = 0; j < 3; ++j) lm.discounts_[k - 1][j] = parse_real(cols[2 + j], line_no);
    } else if (tag == "gram" && cols.size() == 5 && lm.order_ > 0) {
      const std::uint64_t k = parse_count(cols[1], line_no);
      if (k < 1 || k > static_cast<std::uint64_t>(lm.order_)) throw ParseError(line_no, "bad order");
      std::u32string ctx;
      if (cols[2] != "-") {
        for (auto h : text::split(cols[2], ',')) ctx.push_back(parse_hex(h, line_no));
      }
      if (ctx.size() != k - 1) throw ParseError(line_no, "context length does not match order");
      lm.tables_[k - 1][ctx].next[parse_hex(cols[3], line_no)] = parse_count(cols[4], line_no);
    } else {
      throw ParseError(line_no, "unexpected record '" + std::string(tag) + "'");
    }
  }
  if (!header || lm.order_ < 1 || lm.vocab_.empty()) {
    throw ParseError(line_no, "incomplete char LM");
  }
  lm.finalize();
  return lm;
}

double score_word(const CharNGramLM& lm, std::string_view word) {
  if (word.empty()) throw Error(ErrorCode::kInvalidInput, "cannot score an empty word");
  const std::u32string chars = utf8::decode(word);
  double sum = 0.0;
  std::u32string_view hist(chars);
  for (std::size_t i = 0; i < chars.size(); ++i) {
    sum += std::log(lm.prob(hist.substr(0, i), chars[i]));
  }
  sum += std::log(lm.prob(hist, kEos));
  return sum / static_cast<double>(chars.size() + 1);
}

std::vector<BinAssignment> bin_deciles(
    const std::vector<std::pair<std::string, double>>& scored) {
  if (scored.size() < 10) {
    throw Error(ErrorCode::kInvalidInput, "decile binning needs at least 10 words");
  }
  auto [lo, hi] = std::minmax_element(
      scored.begin(), scored.end(),
      [](const auto& a, const auto& b) { return a.second < b.second; });
  const double min = lo->second;
  const double range = hi->second - min;
  if (range == 0.0) warn("all LM scores identical; every word assigned to bin 0");
  std::vector<BinAssignment> out;
  out.reserve(scored.size());
  for (const auto& [w, s] : scored) {
    BinAssignment b;
    b.word = w;
    b.raw = s;
    b.scaled = range == 0.0 ? 0.0 : (s - min) / range;
    b.bin = std::min(static_cast<int>(std::floor(b.scaled * 10.0)), 9);
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<std::string> sample_diverse(const std::vector<std::string>& words,
                                        const CharNGramLM& lm, std::size_t k,
                                        const std::set<std::string>& exclude,
                                        std::uint64_t seed) {
  std::vector<std::string> uniq(words.begin(), words.end());
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());

  std::vector<std::pair<std::string, double>> scored(uniq.size());
  const long n = static_cast<long>(uniq.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    scored[i] = {uniq[i], score_word(lm, uniq[i])};
  }
  const auto bins = bin_deciles(scored);

  std::array<std::vector<std::string>, 10> pool;
  std::size_t available = 0;
  for (const auto& b : bins) {
    if (exclude.count(b.word)) continue;
    pool[b.bin].push_back(b.word);
    ++available;
  }
  if (k > available) {
    throw Error(ErrorCode::kInvalidInput,
                "requested " + std::to_string(k) + " words but only " +
                    std::to_string(available) + " available");
  }

  Rng rng(seed);
  std::vector<int> order(10);
  for (int i = 0; i < 10; ++i) order[i] = i;
  shuffle(order, rng);
  std::array<std::size_t, 10> quota{};
  for (int i = 0; i < 10; ++i) {
    quota[order[i]] = k / 10 + (static_cast<std::size_t>(i) < k % 10 ? 1 : 0);
  }
  std::size_t deficit = 0;
  for (int b = 0; b < 10; ++b) {
    if (pool[b].size() < quota[b]) {
      deficit += quota[b] - pool[b].size();
      quota[b] = pool[b].size();
    }
  }
  if (deficit > 0) {
    warn(std::to_string(deficit) + " sample slots moved from short decile bins");
    while (deficit > 0) {
      for (int b : order) {
        if (deficit > 0 && quota[b] < pool[b].size()) {
          ++quota[b];
          --deficit;
        }
      }
    }
  }

  std::vector<std::string> out;
  out.reserve(k);
  for (int b = 0; b < 10; ++b) {
    auto& p = pool[b];
    for (std::size_t i = 0; i < quota[b]; ++i) {
      std::swap(p[i], p[i + uniform_below(rng, p.size() - i)]);
      out.push_back(p[i]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> top_frequent(const WordCounts& words, std::size_t n,
                                      const std::set<std::string>& exclude) {
  std::vector<std::pair<std::string, std::uint64_t>> v;
  for (const auto& [w, c] : words) {
    if (!exclude.count(w)) v.emplace_back(w, c);
  }
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(n, v.size()); ++i) out.push_back(v[i].first);
  return out;
}

UnigramWordLM UnigramWordLM::train(const WordCounts& counts) {
  UnigramWordLM lm;
  for (const auto& [w, c] : counts) {
    if (c == 0) continue;
    lm.counts_[w] = c;
    lm.total_ += c;
  }
  if (lm.total_ == 0) throw Error(ErrorCode::kInvalidInput, "unigram LM needs a non-empty corpus");
  lm.floor_ = std::log(1.0 / static_cast<double>(lm.total_ + lm.counts_.size() + 1));
  return lm;
}

double UnigramWordLM::logprob(std::string_view word) const {
  auto it = counts_.find(std::string(word));
  if (it == counts_.end()) return floor_;
  return std::log(static_cast<double>(it->second) / static_cast<double>(total_));
}

}  // namespace xlit::lm
