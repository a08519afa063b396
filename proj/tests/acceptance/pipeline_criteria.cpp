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

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <random>

#include "acceptance/criteria.h"
#include "oracle/split_oracle.h"
#include "oracle/workflow_oracle.h"
#include "support/mining_data.h"
#include "support/service_harness.h"
#include "support/synthetic.h"
#include "xlit/log.h"
#include "xlit/miner.h"
#include "xlit/text.h"
#include "xlit/utf8.h"
#include "xlit/validator.h"

namespace acceptance {

using namespace xlit;
using nlohmann::json;
using nlohmann::ordered_json;

Outcome em_miner() {
  Outcome out;
  miner::MiningConfig c;
  c.em_max_iterations = 25;
  c.em_tolerance = 0.0;
  const std::vector<std::vector<miner::AlignedPair>> corpora{
      synth::unlabeled(synth::mixed_aligned(300, 300, 11)),
      synth::unlabeled(synth::mixed_aligned(200, 0, 12)),
      synth::unlabeled(synth::mixed_aligned(0, 200, 13)),
  };
  int monotone = 0;
  for (const auto& corpus : corpora) {
    const auto em = miner::em_train(corpus, c);
    const auto& ll = em.log_likelihood();
    bool ok = em.iterations() == 25;
    for (std::size_t i = 1; i < ll.size(); ++i) ok = ok && ll[i] >= ll[i - 1] - 1e-9;
    monotone += ok;
    out.tally.check(ok, "log-likelihood over 25 iterations, corpus " + std::to_string(monotone));
  }

  const auto mixed = synth::mixed_aligned(500, 500, 21);
  const auto em = miner::em_train(synth::unlabeled(mixed));
  double tp = 0, fp = 0, fn = 0;
  for (const auto& d : mixed) {
    const bool yes = em.posterior(d.pair.native, d.pair.roman) >= 0.5;
    tp += yes && d.transliteration;
    fp += yes && !d.transliteration;
    fn += !yes && d.transliteration;
  }
  const double f1 = 2 * tp / (2 * tp + fp + fn);
  out.tally.check(f1 >= 0.9, "F1 " + std::to_string(f1));

  char buf[160];
  std::snprintf(buf, sizeof buf, "non-decreasing on %d/3 corpora; F1 at 0.5 on 500+500: %.4f (lambda %.3f)", monotone,
                f1, em.lambda());
  out.detail = buf;
  return out;
}

Outcome splits() {
  Outcome out;
  std::mt19937 rng(2024);
  std::size_t violations = 0, removed = 0;
  for (int t = 0; t < 100; ++t) {
    const auto in = oracle::random_split_input(rng, 150);
    const auto s = corpus::make_splits(in.full, in.valid, in.test);
    violations += oracle::split_violations(s);
    removed += s.removed;
    out.tally.check(oracle::split_violations(s) == 0, "lexicon " + std::to_string(t));
    out.tally.check(s.train.size() + s.removed == in.full.size(), "accounting, lexicon " + std::to_string(t));
    const corpus::SplitSpec untouched{in.full, in.valid, in.test, 0};
    out.tally.check(oracle::split_violations(untouched) == s.removed, "minimal removal, lexicon " + std::to_string(t));
  }

  // A roman word held out in Hindi leaves training in every language.
  const auto hin = script::LanguageTag::of("hin");
  const auto tam = script::LanguageTag::of("tam");
  const auto kan = script::LanguageTag::of("kan");
  auto pair = [](const char* r, const char* n, const script::LanguageTag& l) {
    return corpus::TransliterationPair{r, n, l, corpus::Source::kExisting, std::nullopt};
  };
  corpus::Lexicon full;
  full.add(pair("kumar", "कुमार", hin));
  full.add(pair("kumar", "குமார்", tam));
  full.add(pair("kumar", "ಕುಮಾರ್", kan));
  full.add(pair("ravi", "रवि", hin));
  full.add(pair("raavi", "रवि", hin));
  full.add(pair("ravi", "ரவி", tam));
  corpus::Lexicon test_lex;
  test_lex.add(pair("kumar", "कुमार", hin));
  test_lex.add(pair("ravee", "रवि", hin));
  const auto s = corpus::make_splits(full, {}, corpus::group_testset(test_lex, "AK-NEI"));
  const bool rule = s.train.size() == 1 && s.train.pairs()[0].roman == "ravi" && s.train.pairs()[0].lang == tam &&
                    s.removed == 5 && oracle::split_violations(s) == 0;
  out.tally.check(rule, "cross-language roman rule");

  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu violations over 100 lexicons (%zu pairs removed); cross-language rule %s",
                violations, removed, rule ? "holds" : "broken");
  out.detail = buf;
  return out;
}

namespace {

ordered_json library_validation(const std::string& roman, const std::string& native, const std::string& lang) {
  const auto r = validate::validate_pair(roman, native, validate::builtin_table(corpus::parse_lang(lang)));
  ordered_json o;
  o["valid"] = r.valid;
  o["roman_skeleton"] = r.roman_skeleton;
  o["native_skeleton"] = utf8::encode(r.native_skeleton);
  o["mismatch_index"] = r.mismatch_index ? ordered_json(*r.mismatch_index) : ordered_json(nullptr);
  o["matches"] = ordered_json::array();
  for (const auto& m : r.matches) {
    o["matches"].push_back({{"roman_index", m.roman_index}, {"native_begin", m.native_begin}, {"native_end", m.native_end}});
  }
  return o;
}

}  // namespace

Outcome service() {
  Outcome out;
  const auto dir = std::filesystem::temp_directory_path() / "xlit_acceptance_service";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);

  // Crash replay: every cut of the journal restarts a service whose state
  // equals the session snapshot after the last complete line.
  const auto journal = dir / "full.jsonl";
  std::vector<workflow::TaskMap> snaps;
  {
    workflow::TaskStore store(journal, 4);
    oracle::Workflow model(4);
    Rng rng(99);
    int mismatches = 0;
    snaps = oracle::random_session(store, model, rng, 150, &mismatches);
    out.tally.check(mismatches == 0, "store follows the state machine");
  }
  const std::string full = text::read_file(journal.string());
  Rng rng(7);
  int consistent = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t cut = uniform_below(rng, full.size() + 1);
    const std::string prefix = full.substr(0, cut);
    const auto complete = static_cast<std::size_t>(std::count(prefix.begin(), prefix.end(), '\n'));
    const auto path = dir / ("cut" + std::to_string(trial) + ".jsonl");
    text::write_file(path.string(), prefix);
    service::ServiceConfig config;
    config.journal = path.string();
    config.batch_size = 4;
    config.threads = 2;
    harness::Running s(config);
    const auto& want = snaps.at(complete);
    bool ok = s.get("/v1/health").body["tasks"] == want.size();
    for (const auto& [id, task] : want) {
      ok = ok && s.get("/v1/tasks/" + std::to_string(id)).body == json::parse(task.to_json().dump());
    }
    ok = ok && s.get("/v1/tasks/" + std::to_string(want.size() + 1)).status == 404;
    auto created = s.post("/v1/tasks", {{"lang", "hin"}, {"words", {"कमल"}}, {"actor", "after"}});
    ok = ok && created.status == 201 && created.body["tasks"][0]["id"] == want.size() + 1;
    consistent += ok;
    out.tally.check(ok, "truncation at byte " + std::to_string(cut));
  }

  service::ServiceConfig config;
  config.journal = (dir / "caps.jsonl").string();
  harness::Running s(config);
  auto created = s.post("/v1/tasks", {{"lang", "hin"}, {"words", {"कमल"}}, {"actor", "admin"}});
  const std::string base = "/v1/tasks/" + std::to_string(created.body["tasks"][0]["id"].get<int>());
  auto five = s.post(base + "/submit", {{"actor", "t"}, {"variants", {"kamal", "kamala", "kamaal", "kml", "komal"}}});
  out.tally.check(five.status == 422 && five.body["error"]["code"] == "cap_exceeded", "five variants");
  out.tally.check(s.get(base).body["state"] == "pending", "rejected submission changes nothing");
  s.post(base + "/submit", {{"actor", "t"}, {"variants", {"kamal", "kamala"}}});
  auto three = s.post(base + "/review", {{"actor", "v"}, {"accepted", {"kamal"}}, {"additions", {"a", "b", "c"}}});
  out.tally.check(three.status == 422 && three.body["error"]["code"] == "cap_exceeded", "three additions");
  out.tally.check(s.get(base).body["state"] == "transliterated", "rejected review changes nothing");

  // Validator responses against library calls, byte for byte.
  const auto ps = synth::pairs(300, 22);
  Rng pick(21);
  int identical = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const bool bengali = i % 3 == 0;
    const std::string lang = bengali ? "ben" : "hin";
    const std::string roman = i % 2 ? ps[i].first : ps[uniform_below(pick, ps.size())].first;
    const std::string native = synth::render(ps[i].first, bengali ? 0x80 : 0);
    auto r = s.post("/v1/validate", {{"roman", roman}, {"native", native}, {"lang", lang}});
    const bool same = r.status == 200 && r.raw == library_validation(roman, native, lang).dump();
    identical += same;
    out.tally.check(same, "validate " + roman + " " + native);
  }
  for (const auto& [roman, native, lang] : std::vector<std::tuple<std::string, std::string, std::string>>{
           {"kannada", "ಕನ್ನಡ", "kan"}, {"interconnected", "अंतर्संयुक्त", "hin"}, {"ankleshwar", "अंकलेश्वरना", "hin"}}) {
    auto r = s.post("/v1/validate", {{"roman", roman}, {"native", native}, {"lang", lang}});
    const bool same = r.status == 200 && r.raw == library_validation(roman, native, lang).dump();
    identical += same;
    out.tally.check(same, "validate " + roman);
  }

  char buf[200];
  std::snprintf(buf, sizeof buf, "%d/50 truncations consistent over HTTP; caps 422; %d/303 validate bodies identical",
                consistent, identical);
  out.detail = buf;
  return out;
}

}  // namespace acceptance
