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

#include "xlit/miner.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "xlit/log.h"
#include "xlit/script.h"
#include "xlit/text.h"
#include "xlit/utf8.h"

namespace xlit::miner {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr char32_t kEndOfWord = 0;

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

bool is_punct(char32_t c) {
  return (c < 0x80 && std::ispunct(static_cast<int>(c)) && c != '\'' && c != '-') || c == 0x0964 ||
         c == 0x0965;
}

std::string strip(std::string_view word) {
  std::u32string w = utf8::decode(word);
  std::size_t a = 0, b = w.size();
  while (a < b && is_punct(w[a])) ++a;
  while (b > a && is_punct(w[b - 1])) --b;
  return utf8::encode(std::u32string_view(w).substr(a, b - a));
}

std::vector<std::string> words_of(std::string_view label) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < label.size()) {
    while (i < label.size() && (label[i] == ' ' || label[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < label.size() && label[j] != ' ' && label[j] != '\t') ++j;
    if (j > i) {
      std::string w = strip(label.substr(i, j - i));
      if (!w.empty()) out.push_back(std::move(w));
    }
    i = j;
  }
  return out;
}

template <typename T>
std::vector<T> parse_two_columns(std::string_view text, const char* what) {
  std::vector<T> out;
  std::size_t line_no = 0;
  for (std::string_view line : text::split_lines(text)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto cols = text::split(line, '\t');
    if (cols.size() != 2 || cols[0].empty() || cols[1].empty()) {
      throw ParseError(line_no, std::string(what) + ": expected two non-empty tab-separated columns");
    }
    out.push_back({std::string(cols[0]), std::string(cols[1])});
  }
  return out;
}

}  // namespace

void MiningConfig::validate() const {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::kInvalidConfig, m); };
  if (!(threshold <= 0.0)) bad("mining threshold must be <= 0");
  if (min_common < 1) bad("min common 4-grams must be >= 1");
  if (em_max_iterations < 1) bad("EM needs at least one iteration");
  if (em_max_multigram < 1 || em_max_multigram > 2) bad("multigram sides must be 1 or 2 characters");
  if (!(em_tolerance >= 0.0)) bad("EM tolerance must be >= 0");
  if (!(posterior_cutoff >= 0.0)) bad("posterior cutoff must be >= 0");
}

// ---- labels

std::vector<LabelPair> parse_label_pairs(std::string_view text) {
  return parse_two_columns<LabelPair>(text, "label pairs");
}

corpus::Lexicon mine_labels(const std::vector<LabelPair>& labels, const script::LanguageTag& lang,
                            const validate::Validator& validator, LabelReport* report) {
  LabelReport r;
  corpus::Lexicon lex;
  for (const auto& label : labels) {
    ++r.labels;
    auto romans = words_of(label.roman);
    for (auto& w : romans) {
      for (char& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    auto natives = words_of(label.native);
    for (auto& w : natives) w = script::normalize(w);
    for (const auto& roman : romans) {
      for (const auto& native : natives) {
        ++r.candidates;
        if (!corpus::is_valid_roman(roman) || !corpus::is_valid_native(native, lang)) {
          ++r.malformed;
          continue;
        }
        bool ok = false;
        try {
          ok = validator.validate(roman, native).valid;
        } catch (const Error&) {
          ok = false;
        }
        if (!ok) {
          ++r.rejected;
          continue;
        }
        if (lex.add({roman, native, lang, corpus::Source::kLabels, std::nullopt})) {
          ++r.accepted;
        } else {
          ++r.duplicates;
        }
      }
    }
  }
  if (report) *report = r;
  return lex;
}

corpus::Lexicon mine_labels(const std::vector<LabelPair>& labels, const script::LanguageTag& lang,
                            LabelReport* report) {
  validate::ValidatorOptions options;
  options.geminate_leniency = true;
  const validate::Validator v(validate::builtin_table(lang), options);
  return mine_labels(labels, lang, v, report);
}

// ---- EM

std::vector<AlignedPair> parse_aligned_pairs(std::string_view text) {
  return parse_two_columns<AlignedPair>(text, "aligned pairs");
}

namespace {

struct Edge {
  std::size_t from, to;
  int unit;
};

struct Lattice {
  std::u32string x, e;
  std::size_t cells = 0;
  std::vector<Edge> edges;  // ordered by from cell
};

// Calls f(i, j, di, dj) for every step of at most k characters per side,
// in from-cell order.
template <typename F>
void for_each_step(std::size_t n, std::size_t m, std::size_t k, F f) {
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = 0; j <= m; ++j) {
      for (std::size_t di = 0; di <= k && i + di <= n; ++di) {
        for (std::size_t dj = 0; dj <= k && j + dj <= m; ++dj) {
          if (di + dj > 0) f(i, j, di, dj);
        }
      }
    }
  }
}

// Returns log p of the pair under the multigram model (END included) and
// fills the edge posteriors when post is given.
double forward_backward(const Lattice& l, const std::vector<double>& lp, double lp_end,
                        std::vector<double>* post) {
  std::vector<double> alpha(l.cells, kNegInf), beta(l.cells, kNegInf);
  alpha[0] = 0.0;
  for (const Edge& ed : l.edges) alpha[ed.to] = log_add(alpha[ed.to], alpha[ed.from] + lp[ed.unit]);
  beta[l.cells - 1] = lp_end;
  for (auto it = l.edges.rbegin(); it != l.edges.rend(); ++it) {
    beta[it->from] = log_add(beta[it->from], lp[it->unit] + beta[it->to]);
  }
  const double total = beta[0];
  if (post) {
    post->assign(l.edges.size(), 0.0);
    if (total != kNegInf) {
      for (std::size_t k = 0; k < l.edges.size(); ++k) {
        const Edge& ed = l.edges[k];
        (*post)[k] = std::exp(alpha[ed.from] + lp[ed.unit] + beta[ed.to] - total);
      }
    }
  }
  return total;
}

double unigram_logp(const std::u32string& w, const std::map<char32_t, double>& uni) {
  double s = 0.0;
  for (char32_t c : w) {
    auto it = uni.find(c);
    if (it == uni.end()) return kNegInf;
    s += safe_log(it->second);
  }
  auto it = uni.find(kEndOfWord);
  return s + (it == uni.end() ? kNegInf : safe_log(it->second));
}

std::map<char32_t, double> normalized(const std::map<char32_t, double>& counts) {
  double z = 0.0;
  for (const auto& [c, n] : counts) z += n;
  std::map<char32_t, double> out;
  for (const auto& [c, n] : counts) out[c] = n / z;
  return out;
}

}  // namespace

double EMModel::log_p_transliteration(std::string_view native, std::string_view roman) const {
  Lattice l;
  l.x = utf8::decode(native);
  l.e = utf8::decode(roman);
  const std::size_t m = l.e.size();
  l.cells = (l.x.size() + 1) * (m + 1);
  std::vector<double> lp;
  for_each_step(l.x.size(), m, max_multigram_, [&](std::size_t i, std::size_t j, std::size_t di, std::size_t dj) {
    auto it = multigram_.find({l.x.substr(i, di), l.e.substr(j, dj)});
    if (it == multigram_.end()) return;
    lp.push_back(safe_log(it->second));
    l.edges.push_back({i * (m + 1) + j, (i + di) * (m + 1) + j + dj, static_cast<int>(lp.size() - 1)});
  });
  auto end = multigram_.find({});
  return forward_backward(l, lp, end == multigram_.end() ? kNegInf : safe_log(end->second), nullptr);
}

double EMModel::log_p_other(std::string_view native, std::string_view roman) const {
  return unigram_logp(utf8::decode(native), native_uni_) + unigram_logp(utf8::decode(roman), roman_uni_);
}

double EMModel::posterior(std::string_view native, std::string_view roman) const {
  const double a = safe_log(lambda_) + log_p_transliteration(native, roman);
  const double b = safe_log(1.0 - lambda_) + log_p_other(native, roman);
  const double z = log_add(a, b);
  if (z == kNegInf) return 0.0;
  return std::exp(a - z);
}

nlohmann::ordered_json EMModel::summary() const {
  nlohmann::ordered_json j;
  j["lambda"] = lambda_;
  j["iterations"] = iterations();
  j["log_likelihood"] = ll_;
  j["max_multigram"] = max_multigram_;
  j["multigrams"] = multigram_.size();
  j["native_characters"] = native_uni_.size() - 1;
  j["roman_characters"] = roman_uni_.size() - 1;
  return j;
}

EMModel em_train(const std::vector<AlignedPair>& pairs, const MiningConfig& config) {
  config.validate();
  if (pairs.empty()) throw Error(ErrorCode::kInvalidInput, "EM needs at least one aligned pair");

  const auto k = static_cast<std::size_t>(config.em_max_multigram);
  std::map<Multigram, int> unit_id;
  std::vector<Multigram> units;
  std::vector<Lattice> lat(pairs.size());
  std::map<char32_t, double> ncount, rcount;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    Lattice& l = lat[p];
    l.x = utf8::decode(pairs[p].native);
    l.e = utf8::decode(pairs[p].roman);
    const std::size_t m = l.e.size();
    l.cells = (l.x.size() + 1) * (m + 1);
    for_each_step(l.x.size(), m, k, [&](std::size_t i, std::size_t j, std::size_t di, std::size_t dj) {
      Multigram g{l.x.substr(i, di), l.e.substr(j, dj)};
      auto [it, fresh] = unit_id.emplace(g, static_cast<int>(units.size()));
      if (fresh) units.push_back(g);
      l.edges.push_back({i * (m + 1) + j, (i + di) * (m + 1) + j + dj, it->second});
    });
    for (char32_t c : l.x) ncount[c] += 1.0;
    for (char32_t c : l.e) rcount[c] += 1.0;
    ncount[kEndOfWord] += 1.0;
    rcount[kEndOfWord] += 1.0;
  }

  EMModel em;
  em.max_multigram_ = k;
  const std::size_t nu = units.size();
  // uniform start over the multigrams seen in any lattice, END included
  std::vector<double> lp(nu, -std::log(static_cast<double>(nu + 1)));
  double lp_end = -std::log(static_cast<double>(nu + 1));
  // the non-transliteration side is estimated once from every pair and
  // held fixed; refitting it on (1 - posterior) weights lets it collapse
  em.native_uni_ = normalized(ncount);
  em.roman_uni_ = normalized(rcount);
  em.lambda_ = 0.5;

  const std::size_t np = pairs.size();
  std::vector<double> gamma(np), ll(np);
  std::vector<std::vector<double>> post(np);
  for (int it = 0; it < config.em_max_iterations; ++it) {
    const double log_lambda = safe_log(em.lambda_), log_other = safe_log(1.0 - em.lambda_);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::size_t p = 0; p < np; ++p) {
      const double a = log_lambda + forward_backward(lat[p], lp, lp_end, &post[p]);
      const double b = log_other + unigram_logp(lat[p].x, em.native_uni_) + unigram_logp(lat[p].e, em.roman_uni_);
      const double z = log_add(a, b);
      ll[p] = z;
      gamma[p] = z == kNegInf ? 0.0 : std::exp(a - z);
    }
    double total = 0.0;
    for (double v : ll) total += v;
    em.ll_.push_back(total);

    // M-step, summed in pair order
    std::vector<double> mc(nu, 0.0);
    double end_count = 0.0, gsum = 0.0;
    for (std::size_t p = 0; p < np; ++p) {
      const double g = gamma[p];
      gsum += g;
      end_count += g;
      for (std::size_t k = 0; k < lat[p].edges.size(); ++k) mc[lat[p].edges[k].unit] += g * post[p][k];
    }
    em.lambda_ = gsum / static_cast<double>(np);
    if (gsum > 0.0) {
      double z = end_count;
      for (double c : mc) z += c;
      for (std::size_t u = 0; u < nu; ++u) lp[u] = safe_log(mc[u] / z);
      lp_end = safe_log(end_count / z);
    }
    const auto& h = em.ll_;
    if (h.size() >= 2 && (h.back() - h[h.size() - 2]) / static_cast<double>(np) < config.em_tolerance) break;
  }

  for (std::size_t u = 0; u < nu; ++u) {
    if (lp[u] != kNegInf) em.multigram_[units[u]] = std::exp(lp[u]);
  }
  em.multigram_[{}] = std::exp(lp_end);
  return em;
}

Classified classify_pairs(const EMModel& em, const std::vector<AlignedPair>& pairs, double cutoff,
                          const script::LanguageTag& lang) {
  Classified out;
  std::vector<double> post(pairs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t p = 0; p < pairs.size(); ++p) post[p] = em.posterior(pairs[p].native, pairs[p].roman);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const std::string native = script::normalize(pairs[p].native);
    if (post[p] >= cutoff && corpus::is_valid_roman(pairs[p].roman) && corpus::is_valid_native(native, lang)) {
      out.transliterations.push_back({pairs[p].roman, native, lang, corpus::Source::kParallel, post[p]});
    } else {
      out.rejects.push_back(pairs[p]);
    }
  }
  return out;
}

// ---- monolingual

DirectionalScorers model_scorers(const model::XlitModel& native_to_roman,
                                 const model::XlitModel& roman_to_native, const std::string& lang) {
  if (native_to_roman.vocab().direction() != model::Direction::kNativeToRoman ||
      roman_to_native.vocab().direction() != model::Direction::kRomanToNative) {
    throw Error(ErrorCode::kInvalidConfig, "scorer models are in the wrong directions");
  }
  DirectionalScorers s;
  s.xe = [&native_to_roman, lang](const std::string& native, const std::string& roman) {
    return native_to_roman.sequence_logprob(native, lang, roman);
  };
  s.ex = [&roman_to_native, lang](const std::string& roman, const std::string& native) {
    return roman_to_native.sequence_logprob(roman, lang, native);
  };
  s.generate = [&native_to_roman, lang](const std::string& native) {
    const auto c = model::beam_decode(native_to_roman, native, lang, 4);
    return c.empty() ? std::string() : c.front().text;
  };
  return s;
}

std::vector<std::string> four_grams(std::string_view word) {
  const std::u32string w = utf8::decode(word);
  std::set<std::string> grams;
  for (std::size_t i = 0; i + 4 <= w.size(); ++i) grams.insert(utf8::encode(std::u32string_view(w).substr(i, 4)));
  return {grams.begin(), grams.end()};
}

FourGramIndex::FourGramIndex(std::vector<std::string> words) : words_(std::move(words)) {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    exact_.emplace(words_[i], i);
    for (auto& g : four_grams(words_[i])) postings_[g].push_back(i);
  }
}

std::vector<std::size_t> FourGramIndex::lookup(std::string_view query, std::size_t min_common) const {
  std::map<std::size_t, std::size_t> common;
  for (const auto& g : four_grams(query)) {
    auto it = postings_.find(g);
    if (it == postings_.end()) continue;
    for (std::size_t i : it->second) ++common[i];
  }
  std::vector<std::size_t> out;
  for (const auto& [i, n] : common) {
    if (n >= min_common) out.push_back(i);
  }
  auto ex = exact_.find(query);
  if (ex != exact_.end() && !std::binary_search(out.begin(), out.end(), ex->second)) {
    out.insert(std::lower_bound(out.begin(), out.end(), ex->second), ex->second);
  }
  return out;
}

namespace {

// Empty optional when the generation is too short to index.
std::optional<std::vector<MiningCandidate>> candidates_of(const std::string& native, const DirectionalScorers& scorers,
                                                          const FourGramIndex& index, std::size_t min_common) {
  const std::string gen = scorers.generate(native);
  if (utf8::length(gen) < 4) return std::nullopt;
  std::vector<MiningCandidate> out;
  for (std::size_t i : index.lookup(gen, min_common)) out.push_back({native, index.words()[i], gen, std::nullopt, false});
  return out;
}

}  // namespace

std::vector<MiningCandidate> gen_candidates_mono(const std::string& native, const DirectionalScorers& scorers,
                                                 const FourGramIndex& index, std::size_t min_common) {
  auto c = candidates_of(native, scorers, index, min_common);
  if (!c) {
    warn("generated transliteration of '" + native + "' is shorter than four characters; no candidates");
    return {};
  }
  return *c;
}

double score_pair_bidir(const std::string& native, const std::string& roman, const DirectionalScorers& scorers,
                        bool per_char_normalize) {
  double xe = scorers.xe(native, roman);
  double ex = scorers.ex(roman, native);
  if (per_char_normalize) {
    xe /= static_cast<double>(utf8::length(roman) + 1);
    ex /= static_cast<double>(utf8::length(native) + 1);
  }
  return 0.5 * (xe + ex);
}

nlohmann::ordered_json MonoReport::to_json() const {
  nlohmann::ordered_json j;
  j["lang"] = lang;
  j["native_words"] = native_words;
  j["short_generations"] = short_generations;
  j["candidates"] = candidates;
  j["scored"] = scored;
  j["unscorable"] = unscorable;
  j["accepted"] = accepted;
  return j;
}

MonoResult mine_monolingual(const std::vector<std::string>& native_words, const std::vector<std::string>& roman_words,
                            const script::LanguageTag& lang, const DirectionalScorers& scorers,
                            const MiningConfig& config) {
  config.validate();
  MonoResult res;
  res.report.lang = corpus::format_lang(lang);
  res.report.native_words = native_words.size();
  const FourGramIndex index(roman_words);

  struct PerWord {
    bool short_gen = false;
    std::size_t unscorable = 0;
    std::vector<MiningCandidate> cands;
  };
  std::vector<PerWord> per(native_words.size());
  if (!roman_words.empty()) {
#pragma omp parallel for schedule(dynamic, 4)
    for (std::size_t w = 0; w < native_words.size(); ++w) {
      PerWord& pw = per[w];
      std::optional<std::vector<MiningCandidate>> c;
      try {
        c = candidates_of(native_words[w], scorers, index, config.min_common);
      } catch (const Error&) {
        ++pw.unscorable;
        continue;
      }
      if (!c) {
        pw.short_gen = true;
        continue;
      }
      for (auto& cand : *c) {
        try {
          cand.score = score_pair_bidir(cand.native, cand.roman, scorers, config.per_char_normalize);
          cand.accepted = *cand.score > config.threshold;
        } catch (const Error&) {
          ++pw.unscorable;
        }
        pw.cands.push_back(std::move(cand));
      }
    }
  }
  for (auto& pw : per) {
    if (pw.short_gen) ++res.report.short_generations;
    res.report.unscorable += pw.unscorable;
    for (auto& c : pw.cands) {
      ++res.report.candidates;
      if (c.score) ++res.report.scored;
      if (c.accepted) {
        const std::string native = script::normalize(c.native);
        if (corpus::is_valid_roman(c.roman) && corpus::is_valid_native(native, lang) &&
            res.lexicon.add({c.roman, native, lang, corpus::Source::kMonolingual, c.score})) {
          ++res.report.accepted;
        } else {
          c.accepted = false;
        }
      }
      res.candidates.push_back(std::move(c));
    }
  }
  if (res.report.short_generations > 0) {
    warn(std::to_string(res.report.short_generations) +
         " native words generated fewer than four roman characters and produced no candidates");
  }
  return res;
}

}  // namespace xlit::miner
