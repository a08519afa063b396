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

// Umbrella command line: one subcommand per pipeline step. Every option
// can also come from the file given with --config (TOML or INI, one
// section per subcommand, keys named like the long options).

#include <csignal>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "xlit/corpus.h"
#include "xlit/error.h"
#include "xlit/eval.h"
#include "xlit/lm.h"
#include "xlit/log.h"
#include "xlit/miner.h"
#include "xlit/model.h"
#include "xlit/service.h"
#include "xlit/text.h"
#include "xlit/validator.h"

using namespace xlit;

namespace {

constexpr int kUsage = 1;
constexpr int kDataError = 2;

std::string slurp(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  return text::read_file(path);
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    text::write_file(path, content);
  }
}

std::vector<std::string> word_lines(const std::string& path) {
  const std::string body = slurp(path);
  std::vector<std::string> out;
  for (auto line : text::split_lines(body)) {
    if (!line.empty()) out.emplace_back(line);
  }
  return out;
}

std::vector<std::string> keys(const lm::WordCounts& counts) {
  std::vector<std::string> out;
  for (const auto& [w, c] : counts) out.push_back(w);
  return out;
}

// lang=path pairs
std::map<std::string, std::string> lang_paths(const std::vector<std::string>& items) {
  std::map<std::string, std::string> out;
  for (const auto& item : items) {
    auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw CLI::ValidationError("expected lang=path, got " + item);
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

struct SampleOpts {
  std::string words, lexicon, exclude, out, mode = "diverse";
  std::size_t n = 100;
  int order = 4;
  std::uint64_t seed = 1;
};

void run_sample(const SampleOpts& o) {
  if (!o.lexicon.empty()) {
    auto lex = corpus::sample_for_review(corpus::read_lexicon(o.lexicon), o.n, o.seed);
    emit(o.out, corpus::format_lexicon(lex));
    return;
  }
  if (o.words.empty()) throw Error(ErrorCode::kInvalidInput, "sample needs --words or --lexicon");
  auto counts = lm::parse_word_counts(slurp(o.words));
  std::set<std::string> exclude;
  if (!o.exclude.empty()) {
    for (auto& w : word_lines(o.exclude)) exclude.insert(w);
  }
  std::vector<std::string> picked;
  if (o.mode == "frequent") {
    picked = lm::top_frequent(counts, o.n, exclude);
  } else {
    auto clm = lm::CharNGramLM::train(counts, o.order);
    picked = lm::sample_diverse(keys(counts), clm, o.n, exclude, o.seed);
  }
  emit(o.out, text::join(picked, "\n") + (picked.empty() ? "" : "\n"));
}

struct MineLabelsOpts {
  std::string labels, lang, out, report;
};

void run_mine_labels(const MineLabelsOpts& o) {
  const auto lang = corpus::parse_lang(o.lang);
  miner::LabelReport rep;
  auto lex = miner::mine_labels(miner::parse_label_pairs(slurp(o.labels)), lang, &rep);
  emit(o.out, corpus::format_lexicon(lex));
  nlohmann::ordered_json j{{"labels", rep.labels},       {"candidates", rep.candidates},
                           {"malformed", rep.malformed}, {"rejected", rep.rejected},
                           {"accepted", rep.accepted},   {"duplicates", rep.duplicates}};
  if (!o.report.empty()) text::write_file(o.report, j.dump(2) + "\n");
  std::cerr << j.dump() << "\n";
}

struct MineParallelOpts {
  std::string pairs, lang, out, rejects, summary;
  miner::MiningConfig config;
};

void run_mine_parallel(const MineParallelOpts& o) {
  o.config.validate();
  const auto lang = corpus::parse_lang(o.lang);
  auto pairs = miner::parse_aligned_pairs(slurp(o.pairs));
  auto em = miner::em_train(pairs, o.config);
  auto cls = miner::classify_pairs(em, pairs, o.config.posterior_cutoff, lang);
  corpus::Lexicon lex;
  for (auto& p : cls.transliterations) lex.add(p);
  emit(o.out, corpus::format_lexicon(lex));
  if (!o.rejects.empty()) {
    std::string body;
    for (const auto& r : cls.rejects) body += r.native + "\t" + r.roman + "\n";
    text::write_file(o.rejects, body);
  }
  if (!o.summary.empty()) text::write_file(o.summary, em.summary().dump(2) + "\n");
  std::cerr << "pairs " << pairs.size() << ", transliterations " << lex.size() << ", lambda "
            << text::format_double(em.lambda()) << ", iterations " << em.iterations() << "\n";
}

struct MineMonoOpts {
  std::string native, roman, lang, n2r, r2n, out, candidates, report;
  miner::MiningConfig config;
};

void run_mine_mono(const MineMonoOpts& o) {
  o.config.validate();
  const auto lang = corpus::parse_lang(o.lang);
  auto native_words = keys(lm::parse_word_counts(slurp(o.native)));
  auto roman_words = keys(lm::parse_word_counts(slurp(o.roman)));
  auto n2r = model::XlitModel::load(o.n2r);
  auto r2n = model::XlitModel::load(o.r2n);
  auto scorers = miner::model_scorers(n2r, r2n, lang.code);
  auto res = miner::mine_monolingual(native_words, roman_words, lang, scorers, o.config);
  emit(o.out, corpus::format_lexicon(res.lexicon));
  if (!o.candidates.empty()) {
    std::string body;
    for (const auto& c : res.candidates) {
      body += c.native + "\t" + c.roman + "\t" + c.generated + "\t" +
              (c.score ? text::format_double(*c.score) : std::string()) + "\t" + (c.accepted ? "1" : "0") + "\n";
    }
    text::write_file(o.candidates, body);
  }
  if (!o.report.empty()) text::write_file(o.report, res.report.to_json().dump(2) + "\n");
  std::cerr << res.report.to_json().dump() << "\n";
}

struct ValidateOpts {
  std::string input, lang, out;
  bool geminate = false;
};

// Input: roman, native and optionally lang per line. Output adds the
// verdict and the roman skeleton.
void run_validate(const ValidateOpts& o) {
  validate::ValidatorOptions options;
  options.geminate_leniency = o.geminate;
  std::map<std::string, std::unique_ptr<validate::Validator>> cache;
  std::string body;
  std::size_t line_no = 0;
  std::size_t valid = 0, total = 0;
  const std::string input = slurp(o.input);
  for (auto line : text::split_lines(input)) {
    ++line_no;
    if (line.empty()) continue;
    auto cols = text::split(line, '\t');
    if (cols.size() < 2 || cols.size() > 3) throw ParseError(line_no, "expected roman, native[, lang]");
    std::string lang_field = cols.size() == 3 ? std::string(cols[2]) : o.lang;
    if (lang_field.empty()) throw ParseError(line_no, "no language given");
    auto& v = cache[lang_field];
    if (!v) v = std::make_unique<validate::Validator>(validate::builtin_table(corpus::parse_lang(lang_field)), options);
    auto r = v->validate(cols[0], cols[1]);
    ++total;
    valid += r.valid;
    body += std::string(cols[0]) + "\t" + std::string(cols[1]) + "\t" + lang_field + "\t" +
            (r.valid ? "valid" : "invalid") + "\t" + r.roman_skeleton + "\n";
  }
  emit(o.out, body);
  std::cerr << valid << " of " << total << " pairs valid\n";
}

struct SplitOpts {
  std::string full, valid, test, out;
};

void run_split(const SplitOpts& o) {
  auto split = corpus::make_splits(corpus::read_lexicon(o.full), corpus::read_lexicon(o.valid),
                                   corpus::parse_testset(slurp(o.test)));
  corpus::write_splits(split, o.out);
  std::cerr << split_manifest(split) << "\n";
}

struct TrainOpts {
  std::string lexicon, out, direction = "roman_to_native", preset = "desk", resume;
  model::ModelConfig model = model::ModelConfig::desk();
  model::TrainConfig train = desk_schedule();

  static model::TrainConfig desk_schedule() {
    model::TrainConfig c;
    c.batch_size = 32;
    c.warmup_steps = 300;
    c.peak_lr = 2e-3;
    c.max_epochs = 30;
    return c;
  }
};

void run_train(TrainOpts o) {
  o.train.checkpoint_dir = o.out;
  o.train.validate();
  auto lex = corpus::read_lexicon(o.lexicon);
  auto progress = [](const model::EpochStats& s) {
    std::cerr << "epoch " << s.epoch << " loss " << text::format_double(s.loss) << " step " << s.step << " lr "
              << text::format_double(s.lr) << "\n";
  };
  model::TrainResult res = o.resume.empty()
                               ? model::train(lex, o.model, o.train, model::parse_direction(o.direction), progress)
                               : model::train(model::XlitModel::load(o.resume), lex, o.train, progress);
  std::cerr << "initial loss " << text::format_double(res.initial_loss) << "\n";
}

struct DecodeOpts {
  std::string model, lang, input = "-", out, lm;
  int beam = 4;
  std::size_t topk = 4;
  double alpha = 0.9;
};

void run_decode(const DecodeOpts& o) {
  if (o.beam < 1) throw Error(ErrorCode::kInvalidConfig, "beam must be >= 1");
  if (o.topk < 1 || o.topk > static_cast<std::size_t>(o.beam)) {
    throw Error(ErrorCode::kInvalidConfig, "topk must lie in [1, beam]");
  }
  auto m = model::XlitModel::load(o.model);
  std::optional<lm::UnigramWordLM> wlm;
  if (!o.lm.empty()) wlm = lm::UnigramWordLM::train(lm::parse_word_counts(slurp(o.lm)));
  const model::RerankConfig rc{o.alpha, static_cast<std::size_t>(o.beam)};
  rc.validate();
  std::string body;
  for (const auto& word : word_lines(o.input)) {
    auto cands = model::beam_decode(m, word, o.lang, o.beam);
    if (wlm) cands = model::rerank(std::move(cands), *wlm, rc);
    body += word;
    for (std::size_t i = 0; i < cands.size() && i < o.topk; ++i) {
      body += "\t" + cands[i].text + "\t" + text::format_double(cands[i].rerank_score.value_or(cands[i].score));
    }
    body += "\n";
  }
  emit(o.out, body);
}

struct EvalOpts {
  std::vector<std::string> predictions, compare;
  std::string test, json, label = "+rerank";
  std::size_t k = 1;
  bool errors = false;
};

eval::Predictions load_predictions(const std::vector<std::string>& items) {
  eval::Predictions all;
  for (const auto& [lang, path] : lang_paths(items)) all.merge(eval::parse_predictions(slurp(path), lang));
  return all;
}

void run_eval(const EvalOpts& o) {
  auto test = corpus::parse_testset(slurp(o.test));
  auto preds = load_predictions(o.predictions);
  auto report = eval::topk_accuracy(preds, test, o.k);
  std::optional<eval::EvalReport> other;
  if (!o.compare.empty()) other = eval::topk_accuracy(load_predictions(o.compare), test, o.k);
  std::cout << eval::format_table(report, other ? &*other : nullptr, o.label);
  if (!o.json.empty()) {
    nlohmann::ordered_json j;
    j["report"] = report.to_json();
    if (other) {
      j["compare"] = other->to_json();
      j["delta"] = eval::compare_reports(report, *other);
    }
    text::write_file(o.json, j.dump(2) + "\n");
  }
  if (o.errors) {
    for (const auto& [cat, n] : eval::error_summary(preds, test)) {
      std::cout << eval::to_string(cat) << "\t" << n << "\n";
    }
  }
}

struct ServeOpts {
  std::string bind, journal, model, token;
  std::vector<std::string> lms;
  int beam = 4, threads = 8;
  double alpha = 0.9;
  std::size_t batch_size = 100;
};

service::Service* g_service = nullptr;

void run_serve(const ServeOpts& o) {
  service::ServiceConfig defaults;
  defaults.beam = o.beam;
  defaults.alpha = o.alpha;
  defaults.batch_size = o.batch_size;
  defaults.threads = o.threads;
  auto c = service::ServiceConfig::from_env(defaults);
  if (!o.bind.empty()) {
    auto colon = o.bind.rfind(':');
    if (colon == std::string::npos) throw CLI::ValidationError("--bind must be host:port");
    c.host = o.bind.substr(0, colon);
    c.port = std::stoi(o.bind.substr(colon + 1));
  }
  if (!o.journal.empty()) c.journal = o.journal;
  if (!o.model.empty()) c.model = o.model;
  if (!o.token.empty()) c.token = o.token;
  for (const auto& [lang, path] : lang_paths(o.lms)) c.lms[lang] = path;
  service::Service svc(c);
  int port = svc.bind();
  g_service = &svc;
  std::signal(SIGINT, [](int) {
    if (g_service) g_service->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_service) g_service->stop();
  });
  std::cerr << "listening on " << c.host << ":" << port << (svc.model_loaded() ? "" : " (no model)") << "\n";
  svc.listen();
  g_service = nullptr;
}

void mining_options(CLI::App* sub, miner::MiningConfig& c) {
  sub->add_option("--threshold", c.threshold, "keep pairs with score above this");
  sub->add_option("--min-common", c.min_common, "shared distinct 4-grams for a candidate");
  sub->add_option("--em-iterations", c.em_max_iterations, "EM iteration cap");
  sub->add_option("--em-tolerance", c.em_tolerance, "stop when the mean log-likelihood gain is below");
  sub->add_option("--em-max-multigram", c.em_max_multigram, "longest multigram side (1 or 2)");
  sub->add_option("--cutoff", c.posterior_cutoff, "posterior cutoff");
  sub->add_flag("--per-char-normalize", c.per_char_normalize, "length-normalize directional scores");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xlit: transliteration mining, training, decoding and annotation service"};
  app.set_config("--config", "", "TOML or INI file; sections are subcommand names");
  app.require_subcommand(1);

  SampleOpts sample;
  auto* s = app.add_subcommand("sample", "pick native words for annotation, or pairs for review");
  s->add_option("--words", sample.words, "word count file (word<TAB>count)");
  s->add_option("--lexicon", sample.lexicon, "sample pairs per language from this lexicon instead");
  s->add_option("--mode", sample.mode, "diverse or frequent")->check(CLI::IsMember({"diverse", "frequent"}));
  s->add_option("-n,--count", sample.n, "words to pick (pairs per language with --lexicon)");
  s->add_option("--exclude", sample.exclude, "file of words to skip");
  s->add_option("--order", sample.order, "character LM order");
  s->add_option("--seed", sample.seed);
  s->add_option("-o,--out", sample.out, "output file, stdout by default");

  MineLabelsOpts ml;
  auto* l = app.add_subcommand("mine-labels", "pairs from bilingual labels checked by the validator");
  l->add_option("--labels", ml.labels, "roman<TAB>native label file")->required();
  l->add_option("--lang", ml.lang)->required();
  l->add_option("-o,--out", ml.out);
  l->add_option("--report", ml.report, "JSON report file");

  MineParallelOpts mp;
  auto* p = app.add_subcommand("mine-parallel", "EM transliteration mining over aligned word pairs");
  p->add_option("--pairs", mp.pairs, "native<TAB>roman file")->required();
  p->add_option("--lang", mp.lang)->required();
  p->add_option("-o,--out", mp.out);
  p->add_option("--rejects", mp.rejects, "write rejected pairs here");
  p->add_option("--summary", mp.summary, "EM model summary JSON");
  mining_options(p, mp.config);

  MineMonoOpts mm;
  auto* m = app.add_subcommand("mine-mono", "pairs from monolingual word lists and two models");
  m->add_option("--native", mm.native, "native word counts")->required();
  m->add_option("--roman", mm.roman, "roman word counts")->required();
  m->add_option("--lang", mm.lang)->required();
  m->add_option("--native-to-roman", mm.n2r, "checkpoint")->required();
  m->add_option("--roman-to-native", mm.r2n, "checkpoint")->required();
  m->add_option("-o,--out", mm.out);
  m->add_option("--candidates", mm.candidates, "all scored candidates");
  m->add_option("--report", mm.report, "JSON report file");
  mining_options(m, mm.config);

  ValidateOpts va;
  auto* v = app.add_subcommand("validate", "consonant check of roman/native pairs");
  v->add_option("--input", va.input, "roman<TAB>native[<TAB>lang] lines")->required();
  v->add_option("--lang", va.lang, "language for two-column lines");
  v->add_flag("--geminate-leniency", va.geminate, "one roman letter may match a doubled consonant");
  v->add_option("-o,--out", va.out);

  SplitOpts sp;
  auto* sl = app.add_subcommand("split", "overlap-free train/valid/test split");
  sl->add_option("--full", sp.full, "lexicon")->required();
  sl->add_option("--valid", sp.valid, "reserved validation lexicon")->required();
  sl->add_option("--test", sp.test, "test set")->required();
  sl->add_option("-o,--out", sp.out, "output directory")->required();

  TrainOpts tr;
  auto* t = app.add_subcommand("train", "train a transliteration model");
  t->add_option("--lexicon", tr.lexicon)->required();
  t->add_option("-o,--out", tr.out, "checkpoint directory")->required();
  t->add_option("--direction", tr.direction)->check(CLI::IsMember({"roman_to_native", "native_to_roman"}));
  t->add_option("--preset", tr.preset, "desk or paper model and schedule")
      ->check(CLI::IsMember({"desk", "paper"}))
      ->each([&tr](const std::string& name) {
        if (name == "paper") {
          tr.model = model::ModelConfig::paper();
          tr.train = model::TrainConfig::paper();
        }
      });
  t->add_option("--resume", tr.resume, "continue from a checkpoint");
  t->add_option("--encoder-layers", tr.model.encoder_layers);
  t->add_option("--decoder-layers", tr.model.decoder_layers);
  t->add_option("--dim", tr.model.dim);
  t->add_option("--ffn-dim", tr.model.ffn_dim);
  t->add_option("--heads", tr.model.heads);
  t->add_option("--dropout", tr.model.dropout);
  t->add_option("--epochs", tr.train.max_epochs);
  t->add_option("--batch-size", tr.train.batch_size);
  t->add_option("--peak-lr", tr.train.peak_lr);
  t->add_option("--warmup", tr.train.warmup_steps);
  t->add_option("--temperature", tr.train.temperature);
  t->add_option("--seed", tr.train.seed);

  DecodeOpts de;
  auto* d = app.add_subcommand("decode", "beam search over one word per line");
  d->add_option("--model", de.model, "checkpoint")->required();
  d->add_option("--lang", de.lang)->required();
  d->add_option("--input", de.input, "word file, - for stdin");
  d->add_option("-o,--out", de.out);
  d->add_option("--beam", de.beam);
  d->add_option("--topk", de.topk);
  d->add_option("--lm", de.lm, "native word counts; enables reranking");
  d->add_option("--alpha", de.alpha, "rerank interpolation weight");

  EvalOpts ev;
  auto* e = app.add_subcommand("eval", "top-k accuracy tables");
  e->add_option("--predictions", ev.predictions, "lang=decoder output")->required();
  e->add_option("--compare", ev.compare, "lang=second system's output");
  e->add_option("--label", ev.label, "row label of the second system");
  e->add_option("--test", ev.test, "test set")->required();
  e->add_option("-k", ev.k);
  e->add_option("--json", ev.json, "JSON report file");
  e->add_flag("--errors", ev.errors, "print error categories");

  ServeOpts se;
  auto* sv = app.add_subcommand("serve", "HTTP service (env XLIT_BIND, XLIT_JOURNAL, XLIT_MODEL, XLIT_TOKEN, XLIT_LM)");
  sv->add_option("--bind", se.bind, "host:port");
  sv->add_option("--journal", se.journal);
  sv->add_option("--model", se.model);
  sv->add_option("--token", se.token);
  sv->add_option("--lm", se.lms, "lang=word counts");
  sv->add_option("--beam", se.beam);
  sv->add_option("--alpha", se.alpha);
  sv->add_option("--batch-size", se.batch_size);
  sv->add_option("--threads", se.threads);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err) == 0 ? 0 : kUsage;
  }

  try {
    if (s->parsed()) run_sample(sample);
    if (l->parsed()) run_mine_labels(ml);
    if (p->parsed()) run_mine_parallel(mp);
    if (m->parsed()) run_mine_mono(mm);
    if (v->parsed()) run_validate(va);
    if (sl->parsed()) run_split(sp);
    if (t->parsed()) run_train(tr);
    if (d->parsed()) run_decode(de);
    if (e->parsed()) run_eval(ev);
    if (sv->parsed()) run_serve(se);
  } catch (const CLI::Error& err) {
    std::cerr << "xlit: " << err.what() << "\n";
    return kUsage;
  } catch (const Error& err) {
    std::cerr << "xlit: " << to_string(err.code()) << ": " << err.what() << "\n";
    return kDataError;
  } catch (const std::exception& err) {
    std::cerr << "xlit: " << err.what() << "\n";
    return kDataError;
  }
  return 0;
}
