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

#include "xlit/eval.h"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "xlit/embedded_data.h"
#include "xlit/error.h"
#include "xlit/log.h"
#include "xlit/text.h"
#include "xlit/utf8.h"

namespace xlit::eval {

Predictions parse_predictions(std::string_view text, std::string_view lang_code) {
  Predictions out;
  std::size_t line_no = 0;
  for (std::string_view line : text::split_lines(text)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cols = text::split(line, '\t');
    if (cols[0].empty() || cols.size() % 2 == 0) {
      throw ParseError(line_no, "predictions: expected roman then candidate/score columns");
    }
    std::vector<std::string> cands;
    for (std::size_t i = 1; i < cols.size(); i += 2) cands.emplace_back(cols[i]);
    out[{std::string(lang_code), std::string(cols[0])}] = std::move(cands);
  }
  return out;
}

nlohmann::ordered_json EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["k"] = k;
  j["missing"] = missing;
  nlohmann::ordered_json langs = nlohmann::ordered_json::object();
  const auto micro = micro_average(*this);
  for (const auto& [lang, subsets] : cells) {
    nlohmann::ordered_json l;
    for (const auto& [subset, c] : subsets) {
      l["subsets"][subset] = {{"entries", c.entries}, {"correct", c.correct}, {"accuracy", c.accuracy()}};
    }
    if (auto it = micro.find(lang); it != micro.end()) l["micro_avg"] = it->second;
    langs[lang] = l;
  }
  j["languages"] = langs;
  if (!micro.empty()) {
    double s = 0.0;
    for (const auto& [lang, v] : micro) s += v;
    j["mean_micro_avg"] = s / static_cast<double>(micro.size());
  }
  return j;
}

EvalReport topk_accuracy(const Predictions& predictions, const corpus::TestSet& test, std::size_t k) {
  if (k < 1) throw Error(ErrorCode::kInvalidConfig, "k must be >= 1");
  EvalReport r;
  r.k = k;
  for (const auto& e : test) {
    Cell& c = r.cells[e.lang.code][e.subset];
    ++c.entries;
    auto it = predictions.find({e.lang.code, e.roman});
    if (it == predictions.end()) {
      ++r.missing;
      continue;
    }
    std::set<std::string> refs;
    for (const auto& ref : e.references) refs.insert(script::normalize(ref));
    const auto& cands = it->second;
    for (std::size_t i = 0; i < std::min(k, cands.size()); ++i) {
      if (refs.count(script::normalize(cands[i]))) {
        ++c.correct;
        break;
      }
    }
  }
  if (r.missing) warn(std::to_string(r.missing) + " test entries have no prediction and count as wrong");
  return r;
}

std::map<std::string, double> micro_average(const EvalReport& report) {
  std::map<std::string, double> out;
  for (const auto& [lang, subsets] : report.cells) {
    Cell total;
    for (const auto& [s, c] : subsets) {
      total.entries += c.entries;
      total.correct += c.correct;
    }
    if (total.entries) out[lang] = total.accuracy();
  }
  return out;
}

namespace {

std::string pct(std::optional<double> v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * *v);
  return buf;
}

std::optional<double> cell_of(const EvalReport& r, const std::string& lang, const std::string& subset) {
  auto l = r.cells.find(lang);
  if (l == r.cells.end()) return std::nullopt;
  auto s = l->second.find(subset);
  if (s == l->second.end() || s->second.entries == 0) return std::nullopt;
  return s->second.accuracy();
}

}  // namespace

std::string format_table(const EvalReport& report, const EvalReport* other, std::string_view other_label) {
  std::set<std::string> lang_set, subset_set;
  for (const auto* r : {&report, other}) {
    if (!r) continue;
    for (const auto& [lang, subsets] : r->cells) {
      lang_set.insert(lang);
      for (const auto& [s, c] : subsets) subset_set.insert(s);
    }
  }
  std::vector<std::string> subsets;
  for (const auto& s : corpus::test_subsets()) {
    if (subset_set.count(s)) subsets.push_back(s);
  }
  for (const auto& s : subset_set) {
    if (std::find(subsets.begin(), subsets.end(), s) == subsets.end()) subsets.push_back(s);
  }
  const std::vector<std::string> langs(lang_set.begin(), lang_set.end());

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> head{"Testset"};
  head.insert(head.end(), langs.begin(), langs.end());
  head.push_back("avg");
  rows.push_back(head);
  auto add_row = [&](const std::string& label, auto value_of) {
    std::vector<std::string> row{label};
    double sum = 0.0;
    int n = 0;
    for (const auto& l : langs) {
      const auto v = value_of(l);
      if (v) {
        sum += *v;
        ++n;
      }
      row.push_back(pct(v));
    }
    row.push_back(n ? pct(sum / n) : "-");
    rows.push_back(row);
  };
  const std::string extra(other_label);
  for (const auto& s : subsets) {
    add_row(s, [&](const std::string& l) { return cell_of(report, l, s); });
    if (other) add_row(extra, [&](const std::string& l) { return cell_of(*other, l, s); });
  }
  const auto m1 = micro_average(report);
  auto micro_of = [](const std::map<std::string, double>& m, const std::string& l) -> std::optional<double> {
    auto it = m.find(l);
    if (it == m.end()) return std::nullopt;
    return it->second;
  };
  add_row("Micro-avg", [&](const std::string& l) { return micro_of(m1, l); });
  if (other) {
    const auto m2 = micro_average(*other);
    add_row(extra, [&](const std::string& l) { return micro_of(m2, l); });
  }

  std::vector<std::size_t> width(rows[0].size(), 0);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], utf8::length(row[i]));
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      const std::size_t pad = width[i] - utf8::length(row[i]);
      if (i == 0) {
        out << row[i] << std::string(pad, ' ');
      } else {
        out << "  " << std::string(pad, ' ') << row[i];
      }
    }
    out << '\n';
  }
  return out.str();
}

nlohmann::ordered_json compare_reports(const EvalReport& before, const EvalReport& after) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [lang, subsets] : after.cells) {
    for (const auto& [subset, c] : subsets) {
      const auto b = cell_of(before, lang, subset);
      const auto a = cell_of(after, lang, subset);
      if (a && b) j[lang][subset] = *a - *b;
    }
  }
  const auto mb = micro_average(before), ma = micro_average(after);
  for (const auto& [lang, v] : ma) {
    if (auto it = mb.find(lang); it != mb.end()) j[lang]["micro_avg"] = v - it->second;
  }
  return j;
}

std::string_view to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kExact:
      return "Exact";
    case ErrorCategory::kVowelError:
      return "VowelError";
    case ErrorCategory::kShortLongVowelSwap:
      return "ShortLongVowelSwap";
    case ErrorCategory::kConsonantError:
      return "ConsonantError";
    case ErrorCategory::kOther:
      return "Other";
  }
  return "Other";
}

namespace {

std::set<std::pair<char32_t, char32_t>> parse_pairs(std::string_view text, const std::string& name) {
  std::set<std::pair<char32_t, char32_t>> out;
  std::size_t line_no = 0;
  for (std::string_view line : text::split_lines(text)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto cols = text::split(line, '\t');
    if (cols.size() != 2) throw ParseError(line_no, name + ": expected two columns");
    const auto a = utf8::decode(cols[0]), b = utf8::decode(cols[1]);
    if (a.size() != 1 || b.size() != 1) throw ParseError(line_no, name + ": expected single characters");
    out.insert({std::min(a[0], b[0]), std::max(a[0], b[0])});
  }
  return out;
}

struct Op {
  char32_t from, to;  // 0 for an insertion or deletion side
};

// Edit operations of a minimal Levenshtein alignment.
std::vector<Op> diff(const std::u32string& a, const std::u32string& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<std::size_t>> d(n + 1, std::vector<std::size_t>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
    }
  }
  std::vector<Op> ops;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + (a[i - 1] != b[j - 1])) {
      if (a[i - 1] != b[j - 1]) ops.push_back({a[i - 1], b[j - 1]});
      --i;
      --j;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      ops.push_back({a[i - 1], 0});
      --i;
    } else {
      ops.push_back({0, b[j - 1]});
      --j;
    }
  }
  return ops;
}

}  // namespace

std::set<std::pair<char32_t, char32_t>> matra_pairs(script::Script s) {
  const auto& files = embedded_files();
  const std::string own = "matra_pairs/" + std::string(script::to_string(s)) + ".tsv";
  if (auto it = files.find(own); it != files.end()) return parse_pairs(it->second, own);
  const auto deva = parse_pairs(files.at("matra_pairs/devanagari.tsv"), "matra_pairs/devanagari.tsv");
  std::set<std::pair<char32_t, char32_t>> out;
  for (const auto& [a, b] : deva) {
    try {
      script::TranslationReport ra, rb;
      const auto ca = utf8::decode(script::from_devanagari(utf8::encode(a), s, &ra));
      const auto cb = utf8::decode(script::from_devanagari(utf8::encode(b), s, &rb));
      if (ra.unmapped || rb.unmapped || ca.size() != 1 || cb.size() != 1) continue;
      out.insert({std::min(ca[0], cb[0]), std::max(ca[0], cb[0])});
    } catch (const Error&) {
      return {};
    }
  }
  return out;
}

ErrorCategory categorize_error(std::string_view prediction, std::string_view reference, script::Script s) {
  const std::string p = script::normalize(prediction), r = script::normalize(reference);
  const auto pc = utf8::decode(p), rc = utf8::decode(r);
  if (!script::is_in_script(pc, s) || !script::is_in_script(rc, s)) {
    throw Error(ErrorCode::kInvalidInput, "error categories need both words in " + std::string(script::to_string(s)));
  }
  if (p == r) return ErrorCategory::kExact;
  if (script::consonant_skeleton(p, s) != script::consonant_skeleton(r, s)) return ErrorCategory::kConsonantError;
  auto is_vowel = [s](char32_t c) {
    const auto k = script::classify_char(c, s);
    return k == script::CharClass::kIndependentVowel || k == script::CharClass::kVowelSign;
  };
  const auto ops = diff(pc, rc);
  bool all_vowels = true, all_swaps = true;
  const auto pairs = matra_pairs(s);
  for (const Op& op : ops) {
    if ((op.from && !is_vowel(op.from)) || (op.to && !is_vowel(op.to))) all_vowels = false;
    if (!op.from || !op.to || !pairs.count({std::min(op.from, op.to), std::max(op.from, op.to)})) all_swaps = false;
  }
  if (!all_vowels) return ErrorCategory::kOther;
  return all_swaps ? ErrorCategory::kShortLongVowelSwap : ErrorCategory::kVowelError;
}

std::map<ErrorCategory, std::size_t> error_summary(const Predictions& predictions, const corpus::TestSet& test) {
  std::map<ErrorCategory, std::size_t> out;
  for (const auto& e : test) {
    auto it = predictions.find({e.lang.code, e.roman});
    if (it == predictions.end() || it->second.empty()) continue;
    ErrorCategory best = ErrorCategory::kOther;
    bool any = false;
    for (const auto& ref : e.references) {
      try {
        const auto c = categorize_error(it->second.front(), ref, e.lang.script);
        if (!any || c < best) best = c;
        any = true;
      } catch (const Error&) {
      }
    }
    if (any) ++out[best];
  }
  return out;
}

}  // namespace xlit::eval
