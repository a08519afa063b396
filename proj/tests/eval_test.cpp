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

#include "doctest.h"
#include "support/synthetic.h"
#include "xlit/error.h"
#include "xlit/eval.h"
#include "xlit/log.h"

using namespace xlit;
using namespace xlit::eval;
using script::Script;

namespace {

corpus::TestEntry entry(std::string roman, std::vector<std::string> refs, std::string subset = "AK-Freq",
                        std::string lang = "hin") {
  return {std::move(roman), std::move(refs), corpus::parse_lang(lang), std::move(subset)};
}

// Counts by direct scan, one entry at a time.
std::size_t count_correct(const Predictions& p, const corpus::TestSet& t, std::size_t k) {
  std::size_t n = 0;
  for (const auto& e : t) {
    if (!p.count({e.lang.code, e.roman})) continue;
    const auto& c = p.at({e.lang.code, e.roman});
    bool hit = false;
    for (std::size_t i = 0; i < c.size() && i < k; ++i) {
      for (const auto& r : e.references) hit |= c[i] == r;
    }
    n += hit;
  }
  return n;
}

struct RandomCase {
  corpus::TestSet test;
  Predictions pred;
};

RandomCase random_case(Rng& rng) {
  const auto ps = synth::pairs(40, rng());
  RandomCase rc;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto& [r, n] = ps[i];
    const std::string subset = corpus::test_subsets()[uniform_below(rng, 4)];
    std::vector<std::string> refs{n};
    if (uniform_below(rng, 3) == 0) refs.push_back(ps[(i + 1) % ps.size()].second);
    rc.test.push_back(entry(r, refs, subset, uniform_below(rng, 2) ? "hin" : "mar"));
    if (uniform_below(rng, 10) == 0) continue;
    std::vector<std::string> cands;
    for (int j = 0; j < 4; ++j) cands.push_back(ps[uniform_below(rng, ps.size())].second);
    if (uniform_below(rng, 2) == 0) cands[uniform_below(rng, 4)] = n;
    rc.pred[{rc.test.back().lang.code, r}] = cands;
  }
  return rc;
}

}  // namespace

TEST_CASE("top-k accuracy examples") {
  const corpus::TestSet t{entry("a", {"अ"}), entry("b", {"ब", "बी"}), entry("c", {"च"}), entry("d", {"द"})};
  Predictions exact;
  for (const auto& e : t) exact[{"hin", e.roman}] = {e.references[0]};
  CHECK(topk_accuracy(exact, t, 1).cells["hin"]["AK-Freq"].accuracy() == 1.0);

  Predictions p{{{"hin", "a"}, {"अ"}}, {{"hin", "b"}, {"बी"}}, {{"hin", "c"}, {"छ", "च"}}, {{"hin", "d"}, {"द"}}};
  auto r = topk_accuracy(p, t, 1);
  CHECK(r.cells["hin"]["AK-Freq"].correct == 3);
  CHECK(r.cells["hin"]["AK-Freq"].accuracy() == 0.75);
  CHECK(topk_accuracy(p, t, 2).cells["hin"]["AK-Freq"].accuracy() == 1.0);

  p.erase({"hin", "d"});
  WarningCapture w;
  r = topk_accuracy(p, t, 1);
  CHECK(r.missing == 1);
  CHECK(r.cells["hin"]["AK-Freq"].correct == 2);
  CHECK(w.contains("no prediction"));
  CHECK_THROWS_AS(topk_accuracy(p, t, 0), Error);

  // composed and decomposed forms compare equal
  const corpus::TestSet nukta{entry("za", {"ज़"})};
  CHECK(topk_accuracy({{{"hin", "za"}, {"ज़"}}}, nukta, 1).cells["hin"]["AK-Freq"].correct == 1);
}

TEST_CASE("micro average") {
  EvalReport r;
  r.cells["hin"]["AK-Freq"] = {10, 9};
  r.cells["hin"]["AK-Uni"] = {30, 15};
  r.cells["tam"]["AK-Freq"] = {8, 8};
  r.cells["tam"]["AK-NEF"] = {2, 2};
  r.cells["kan"]["AK-NEF"] = {4, 1};
  r.cells["mar"]["AK-NEF"] = {0, 0};
  const auto m = micro_average(r);
  CHECK(m.at("hin") == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(m.at("tam") == 1.0);
  CHECK(m.at("kan") == 0.25);
  CHECK(!m.count("mar"));
  const auto j = r.to_json();
  CHECK(j["languages"]["hin"]["micro_avg"] == doctest::Approx(0.6));
  const std::string table = format_table(r);
  CHECK(table.find("Micro-avg") != std::string::npos);
  CHECK(table.find("60.00") != std::string::npos);
  CHECK(table.find("Testset") == 0);
}

TEST_CASE("accuracy properties on random test sets") {
  WarningCapture quiet;
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    auto rc = random_case(rng);
    double prev = -1.0;
    for (std::size_t k = 1; k <= 5; ++k) {
      const auto r = topk_accuracy(rc.pred, rc.test, k);
      std::size_t correct = 0, entries = 0;
      for (const auto& [lang, subsets] : r.cells) {
        for (const auto& [s, c] : subsets) {
          correct += c.correct;
          entries += c.entries;
          CHECK(c.accuracy() >= 0.0);
          CHECK(c.accuracy() <= 1.0);
        }
      }
      CHECK(entries == rc.test.size());
      CHECK(correct == count_correct(rc.pred, rc.test, k));
      const double acc = static_cast<double>(correct) / entries;
      CHECK(acc >= prev);
      prev = acc;

      const auto micro = micro_average(r);
      for (const auto& [lang, subsets] : r.cells) {
        double lo = 1.0, hi = 0.0;
        for (const auto& [s, c] : subsets) {
          lo = std::min(lo, c.accuracy());
          hi = std::max(hi, c.accuracy());
        }
        CHECK(micro.at(lang) >= lo - 1e-15);
        CHECK(micro.at(lang) <= hi + 1e-15);
      }
    }
    // one more reference per entry never hurts
    const std::size_t before = count_correct(rc.pred, rc.test, 1);
    auto more = rc.test;
    for (auto& e : more) e.references.push_back(rc.test[uniform_below(rng, rc.test.size())].references[0]);
    std::size_t after = 0;
    for (const auto& [lang, subsets] : topk_accuracy(rc.pred, more, 1).cells) {
      for (const auto& [s, c] : subsets) after += c.correct;
    }
    CHECK(after >= before);
  }
}

TEST_CASE("report comparison") {
  EvalReport a, b;
  a.cells["hin"]["AK-Freq"] = {10, 5};
  b.cells["hin"]["AK-Freq"] = {10, 7};
  const auto d = compare_reports(a, b);
  CHECK(d["hin"]["AK-Freq"].get<double>() == doctest::Approx(0.2));
  CHECK(d["hin"]["micro_avg"].get<double>() == doctest::Approx(0.2));
  const std::string t = format_table(a, &b);
  CHECK(t.find("+rerank") != std::string::npos);
  CHECK(t.find("70.00") != std::string::npos);
}

TEST_CASE("parse decoder output") {
  const auto p = parse_predictions("ram\tराम\t-0.1\tरम\t-2.3\nsita\tसीता\t-0.2\n", "hin");
  CHECK(p.at({"hin", "ram"}) == std::vector<std::string>{"राम", "रम"});
  CHECK(p.at({"hin", "sita"}).size() == 1);
  CHECK_THROWS_AS(parse_predictions("ram\tराम\n", "hin"), ParseError);
}

TEST_CASE("error categories") {
  const Script deva = Script::kDevanagari;
  CHECK(categorize_error("केला", "केला", deva) == ErrorCategory::kExact);
  CHECK(categorize_error("कैला", "केला", deva) == ErrorCategory::kShortLongVowelSwap);
  CHECK(categorize_error("किताब", "कीताब", deva) == ErrorCategory::kShortLongVowelSwap);
  CHECK(categorize_error("कुताब", "किताब", deva) == ErrorCategory::kVowelError);
  CHECK(categorize_error("कताब", "किताब", deva) == ErrorCategory::kVowelError);
  CHECK(categorize_error("कला", "कमला", deva) == ErrorCategory::kConsonantError);
  CHECK(categorize_error("खमला", "कमला", deva) == ErrorCategory::kConsonantError);
  CHECK(categorize_error("कंला", "कला", deva) == ErrorCategory::kOther);
  CHECK_THROWS_AS(categorize_error("kela", "केला", deva), Error);
  CHECK_THROWS_AS(categorize_error("কেলা", "केला", deva), Error);

  // carried into other Brahmi scripts
  CHECK(categorize_error("কৈলা", "কেলা", Script::kBengali) == ErrorCategory::kShortLongVowelSwap);
  CHECK(categorize_error("கொடி", "கோடி", Script::kTamil) == ErrorCategory::kShortLongVowelSwap);
  CHECK(matra_pairs(Script::kDevanagari).count({0x0947, 0x0948}));
  CHECK(matra_pairs(Script::kArabic).empty());

  for (const auto& [r, n] : synth::pairs(200, 3)) CHECK(categorize_error(n, n, deva) == ErrorCategory::kExact);

  const corpus::TestSet t{entry("kela", {"केला"}), entry("kamala", {"कमला", "कमल"})};
  const Predictions p{{{"hin", "kela"}, {"कैला"}}, {{"hin", "kamala"}, {"कमल"}}};
  const auto s = error_summary(p, t);
  CHECK(s.at(ErrorCategory::kShortLongVowelSwap) == 1);
  CHECK(s.at(ErrorCategory::kExact) == 1);
}
