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

#include <cmath>
#include <random>
#include <set>

#include "acceptance/criteria.h"
#include "oracle/gradcheck.h"
#include "oracle/kn_oracle.h"
#include "xlit/lm.h"
#include "xlit/log.h"
#include "xlit/script.h"
#include "xlit/transformer.h"
#include "xlit/utf8.h"
#include "xlit/validator.h"

namespace acceptance {

using namespace xlit;

Outcome validator_examples() {
  Outcome out;
  using script::LanguageTag;
  const auto hin = validate::builtin_table(LanguageTag::of("hin"));
  const auto kan = validate::builtin_table(LanguageTag::of("kan"));
  struct Case {
    const char* roman;
    const char* native;
    const validate::ConsonantMapTable* table;
    bool valid;
  };
  const std::vector<Case> curated{
      {"interconnected", "अंतर्संयुक्त", &hin, false},
      {"ankleshwar", "अंकलेश्वरना", &hin, false},
      {"kannada", "ಕನ್ನಡ", &kan, true},
      {"surname", "उपनाम", &hin, false},
      {"usage", "उपयोग", &hin, false},
      {"dusshera", "दशैराणा", &hin, false},
      {"krishna", "कृष्ण", &hin, true},
      {"mumbai", "मुंबई", &hin, true},
      {"bengaluru", "ಬೆಂಗಳೂರು", &kan, true},
      {"mysuru", "ಮೈಸೂರು", &kan, true},
      {"box", "ಬಾಕ್ಸ್", &kan, true},
      // x maps only to ಕಸ, so the initial ಜ has no counterpart
      {"xerox", "ಜೆರಾಕ್ಸ್", &kan, false},
      {"ram", "राम", &hin, true},
      {"mohan", "मोहन", &hin, true},
  };
  int passed = 0;
  for (const auto& c : curated) {
    const bool got = validate::validate_pair(c.roman, c.native, *c.table).valid;
    out.tally.check(got == c.valid, std::string(c.roman) + "/" + c.native);
    passed += got == c.valid;
  }

  // Inserting, deleting or replacing vowels and stop-listed letters never
  // changes the verdict.
  std::mt19937 rng(2024);
  const std::string inert = "aeiouhy'-";
  int held = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto& c = curated[trial % curated.size()];
    const bool expected = validate::validate_pair(c.roman, c.native, *c.table).valid;
    std::string m = c.roman;
    for (int step = 0, steps = 1 + static_cast<int>(rng() % 3); step < steps; ++step) {
      std::vector<std::size_t> pos;
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (inert.find(m[i]) != std::string::npos) pos.push_back(i);
      }
      const char ch = inert[rng() % inert.size()];
      const int op = static_cast<int>(rng() % 3);
      if (op == 0 || pos.empty()) {
        m.insert(m.begin() + static_cast<long>(rng() % (m.size() + 1)), ch);
      } else if (op == 1) {
        m.erase(pos[rng() % pos.size()], 1);
      } else {
        m[pos[rng() % pos.size()]] = ch;
      }
    }
    const bool same = validate::validate_pair(m, c.native, *c.table).valid == expected;
    out.tally.check(same, "mutation " + m + " of " + c.roman);
    held += same;
  }
  out.detail = std::to_string(passed) + "/" + std::to_string(curated.size()) + " curated, " +
               std::to_string(held) + "/1000 mutations";
  return out;
}

Outcome script_unification() {
  Outcome out;
  using script::Script;
  const auto& reg = script::ScriptRegistry::builtin();
  int specs = 0;
  std::size_t points = 0;
  for (Script s : reg.scripts()) {
    const auto& spec = reg.spec(s);
    if (!spec.brahmi) continue;
    ++specs;
    for (std::size_t off = 0; off < spec.size(); ++off) {
      if (!spec.mappable[off]) continue;
      const std::string c = utf8::encode(spec.first + static_cast<char32_t>(off));
      const std::string deva = script::to_devanagari(c, s);
      const auto d = utf8::decode(deva);
      out.tally.check(d.size() == 1 && d[0] == 0x0900 + off, "offset of " + c);
      out.tally.check(script::from_devanagari(deva, s) == c, "round trip of " + c);
      ++points;
    }
  }
  out.tally.check(specs == 9, "nine Brahmi scripts registered");
  out.tally.check(script::to_devanagari("ಕ", Script::kKannada) == "क", "ಕ to क");
  out.tally.check(utf8::decode("ಕ")[0] - 0x0C80 == utf8::decode("क")[0] - 0x0900, "ಕ and क share the offset");
  out.detail = std::to_string(specs) + " scripts, " + std::to_string(points) + " code points";
  return out;
}

namespace {

lm::WordCounts random_corpus(std::mt19937& rng, int n, const std::u32string& alphabet, int max_len) {
  lm::WordCounts out;
  while (static_cast<int>(out.size()) < n) {
    std::u32string w;
    const int len = 1 + static_cast<int>(rng() % max_len);
    for (int i = 0; i < len; ++i) w.push_back(alphabet[rng() % alphabet.size()]);
    out[utf8::encode(w)] = 1 + rng() % 5;
  }
  return out;
}

}  // namespace

Outcome char_lm() {
  Outcome out;
  std::mt19937 rng(31);
  const auto corpus = random_corpus(rng, 1000, U"abcdefgh", 7);
  const auto model = lm::CharNGramLM::train(corpus, 4);
  const auto& vocab = model.vocabulary();
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    std::u32string ctx;
    const int len = static_cast<int>(rng() % 6);
    for (int i = 0; i < len; ++i) {
      char32_t c = vocab[rng() % vocab.size()];
      ctx.push_back(c == lm::kEos ? lm::kBos : c);
    }
    double s = 0;
    for (char32_t c : vocab) s += model.prob(ctx, c);
    worst = std::max(worst, std::abs(s - 1.0));
    out.tally.check(std::abs(s - 1.0) <= 1e-9, "mass of context " + utf8::encode(ctx));
  }

  // Chain rule against the brute-force estimator, on a corpus small enough
  // for it.
  const auto small = random_corpus(rng, 120, U"abcdef", 6);
  const auto small_lm = lm::CharNGramLM::train(small, 4);
  const oracle::KneserNey kn(small, 4);
  double worst_score = 0;
  int scored = 0;
  for (const auto& [w, f] : small) {
    if (scored++ >= 40) break;
    const double d = std::abs(lm::score_word(small_lm, w) - kn.score(w));
    worst_score = std::max(worst_score, d);
    out.tally.check(d <= 1e-9, "score of " + w);
  }
  for (const char* w : {"fedcba", "aaaaaa", "z", "abcabc"}) {
    const double d = std::abs(lm::score_word(small_lm, w) - kn.score(w));
    worst_score = std::max(worst_score, d);
    out.tally.check(d <= 1e-9, std::string("score of ") + w);
  }

  // Sampler: same seed same sample, exclusions respected, bins filled.
  std::vector<std::string> words;
  std::vector<std::pair<std::string, double>> scored_words;
  for (const auto& [w, f] : corpus) {
    words.push_back(w);
    scored_words.emplace_back(w, lm::score_word(model, w));
  }
  std::map<std::string, int> bin_of;
  std::array<int, 10> sizes{};
  for (const auto& b : lm::bin_deciles(scored_words)) {
    bin_of[b.word] = b.bin;
    ++sizes[b.bin];
  }
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    std::set<std::string> exclude;
    for (int i = 0; i < 50; ++i) exclude.insert(words[(seed * 37 + i * 11) % words.size()]);
    const auto a = lm::sample_diverse(words, model, 40, exclude, seed);
    const auto b = lm::sample_diverse(words, model, 40, exclude, seed);
    out.tally.check(a == b, "determinism, seed " + std::to_string(seed));
    out.tally.check(a.size() == 40, "sample size, seed " + std::to_string(seed));
    bool clean = true;
    for (const auto& w : a) clean = clean && !exclude.count(w);
    out.tally.check(clean, "exclusion, seed " + std::to_string(seed));
    out.tally.check(std::set<std::string>(a.begin(), a.end()).size() == a.size(), "distinct words");
    std::array<int, 10> per{};
    for (const auto& w : a) ++per[bin_of.at(w)];
    bool quotas = true;
    for (int k = 0; k < 10; ++k) quotas = quotas && (per[k] >= 4 || sizes[k] < 4 + 50);
    out.tally.check(quotas, "bin quotas, seed " + std::to_string(seed));
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "max |sum P - 1| %.1e, max score error %.1e", worst, worst_score);
  out.detail = buf;
  return out;
}

Outcome model_numerics() {
  Outcome out;
  using namespace xlit::model;
  ModelConfig tiny;
  tiny.dim = 8;
  tiny.ffn_dim = 12;
  tiny.heads = 2;
  tiny.dropout = 0.0;
  std::mt19937 rng(42);
  double worst = 0;
  std::size_t groups = 0;
  for (int trial = 0; trial < 3; ++trial) {
    ModelConfig c = tiny;
    c.embed_layernorm = trial != 2;
    Transformer<double> net(c, 7, 6);
    oracle::randomize(net, rng);
    const auto batch = oracle::random_batch(rng, 2, 7, 6);
    const auto errs = oracle::gradcheck(net, batch, 1e-5);
    groups = std::max(groups, errs.size());
    out.tally.check(errs.size() == net.layout().tensors().size(), "every parameter group checked");
    for (const auto& [name, e] : errs) {
      worst = std::max(worst, e.max_rel);
      out.tally.check(e.max_rel < 1e-3, "gradient of " + name);
    }
  }

  double worst_mass = 0;
  Transformer<float> desk(ModelConfig::desk(), 20, 30);
  desk.init(5);
  for (int t = 0; t < 5; ++t) {
    const auto b = oracle::random_batch(rng, 4, 20, 30);
    const auto lp = desk.forward(b);
    for (std::size_t r = 0; r < b.tgt_in.size(); ++r) {
      double s = 0;
      for (std::size_t j = 0; j < 30; ++j) s += std::exp(static_cast<double>(lp[r * 30 + j]));
      worst_mass = std::max(worst_mass, std::abs(s - 1.0));
      out.tally.check(std::abs(s - 1.0) <= 1e-5, "softmax row sum");
    }
  }

  // Causality: changing target position 3 leaves positions 0..2 alone.
  Transformer<double> net(tiny, 9, 9);
  oracle::randomize(net, rng);
  Batch a, b;
  a.add_target(a.add_source({0, 3, 4, 5, 1}), {0, 3, 4, 5, 6}, {3, 4, 5, 6, 1});
  b.add_target(b.add_source({0, 3, 4, 5, 1}), {0, 3, 4, 8, 7}, {3, 4, 8, 7, 1});
  const auto la = net.forward(a), lb = net.forward(b);
  bool prefix_same = true, later_differs = false;
  for (std::size_t j = 0; j < 9; ++j) {
    for (std::size_t r = 0; r < 3; ++r) prefix_same = prefix_same && la[r * 9 + j] == lb[r * 9 + j];
    later_differs = later_differs || la[3 * 9 + j] != lb[3 * 9 + j];
  }
  out.tally.check(prefix_same, "causal prefix");
  out.tally.check(later_differs, "later positions see the change");

  // PAD invariance.
  Batch plain, padded;
  plain.add_target(plain.add_source({0, 3, 4, 1}), {0, 5, 6}, {5, 6, 1});
  padded.add_target(padded.add_source({0, 3, 4, 1, kPadId, kPadId, kPadId}), {0, 5, 6, kPadId, kPadId},
                    {5, 6, 1, kPadId, kPadId});
  const auto lp = net.forward(plain), lq = net.forward(padded);
  bool pad_same = true;
  for (std::size_t i = 0; i < 27; ++i) pad_same = pad_same && std::abs(lp[i] - lq[i]) <= 1e-12 * std::abs(lp[i]) + 1e-15;
  out.tally.check(pad_same, "padding leaves log probabilities unchanged");
  out.tally.check(std::abs(net.loss(plain) - net.loss(padded)) <= 1e-12, "padding leaves the loss unchanged");

  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu groups, max rel grad error %.2e, max |row sum - 1| %.1e", groups, worst,
                worst_mass);
  out.detail = buf;
  return out;
}

}  // namespace acceptance
