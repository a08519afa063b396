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

#include "xlit/model.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <set>

#include "json.hpp"
#include "xlit/text.h"
#include "xlit/utf8.h"

namespace xlit::model {

namespace {

constexpr char kMagic[8] = {'X', 'L', 'I', 'T', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCheckpointVersion = 1;
const std::vector<std::string> kSpecials{"<s>", "</s>", "<pad>"};

std::string hex_symbol(char32_t c) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "U+%04X", static_cast<unsigned>(c));
  return buf;
}

template <typename U>
void put_le(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

template <typename U>
U get_le(std::string_view in, std::size_t at) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    v |= static_cast<U>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  }
  return v;
}

nlohmann::json config_json(const ModelConfig& c) {
  return {{"encoder_layers", c.encoder_layers}, {"decoder_layers", c.decoder_layers},
          {"dim", c.dim},
          {"ffn_dim", c.ffn_dim},
          {"heads", c.heads},
          {"dropout", c.dropout},
          {"attention_dropout", c.attention_dropout},
          {"embed_layernorm", c.embed_layernorm},
          {"pre_norm", c.pre_norm},
          {"activation", "gelu"}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.encoder_layers = j.at("encoder_layers").get<int>();
  c.decoder_layers = j.at("decoder_layers").get<int>();
  c.dim = j.at("dim").get<int>();
  c.ffn_dim = j.at("ffn_dim").get<int>();
  c.heads = j.at("heads").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.attention_dropout = j.at("attention_dropout").get<double>();
  c.embed_layernorm = j.at("embed_layernorm").get<bool>();
  c.pre_norm = j.at("pre_norm").get<bool>();
  return c;
}

}  // namespace

UnknownSymbol::UnknownSymbol(char32_t symbol)
    : Error(ErrorCode::kUnknownSymbol,
            "unknown symbol '" + utf8::encode(symbol) + "' (" + hex_symbol(symbol) + ")"),
      symbol_(symbol) {}

std::string_view to_string(Direction direction) {
  return direction == Direction::kRomanToNative ? "roman_to_native" : "native_to_roman";
}

Direction parse_direction(std::string_view name) {
  if (name == "roman_to_native") return Direction::kRomanToNative;
  if (name == "native_to_roman") return Direction::kNativeToRoman;
  throw Error(ErrorCode::kInvalidInput, "unknown direction '" + std::string(name) + "'");
}

XlitVocab XlitVocab::build(const corpus::Lexicon& lexicon, Direction direction) {
  if (lexicon.empty()) throw Error(ErrorCode::kInvalidInput, "cannot build a vocabulary from an empty lexicon");
  XlitVocab v;
  v.direction_ = direction;
  std::set<std::string> tags;
  std::set<char32_t> in, out;
  for (const auto& p : lexicon.pairs()) {
    tags.insert("<" + p.lang.code + ">");
    for (char32_t c : utf8::decode(v.source_of(p))) in.insert(c);
    for (char32_t c : utf8::decode(v.target_of(p))) out.insert(c);
  }
  v.input_ = kSpecials;
  v.input_.insert(v.input_.end(), tags.begin(), tags.end());
  for (char32_t c : in) v.input_.push_back(utf8::encode(c));
  v.output_ = kSpecials;
  for (char32_t c : out) v.output_.push_back(utf8::encode(c));
  v.index();
  return v;
}

XlitVocab XlitVocab::from_tables(Direction direction, std::vector<std::string> input,
                                 std::vector<std::string> output) {
  XlitVocab v;
  v.direction_ = direction;
  v.input_ = std::move(input);
  v.output_ = std::move(output);
  auto bad = [](const std::string& m) { throw Error(ErrorCode::kParseError, "vocabulary: " + m); };
  for (const auto* t : {&v.input_, &v.output_}) {
    if (t->size() < 3 || !std::equal(kSpecials.begin(), kSpecials.end(), t->begin())) {
      bad("tables must start with the special tokens");
    }
    std::set<std::string> seen(t->begin(), t->end());
    if (seen.size() != t->size()) bad("duplicate token");
  }
  for (std::size_t i = 3; i < v.output_.size(); ++i) {
    if (v.output_[i].front() == '<' && v.output_[i].size() > 1) bad("tag token in output table");
  }
  v.index();
  return v;
}

void XlitVocab::index() {
  in_chars_.clear();
  tags_.clear();
  out_chars_.clear();
  for (std::size_t i = 3; i < input_.size(); ++i) {
    const std::string& t = input_[i];
    if (t.size() > 2 && t.front() == '<' && t.back() == '>') {
      tags_[t.substr(1, t.size() - 2)] = static_cast<int>(i);
    } else {
      const std::u32string cs = utf8::decode(t);
      if (cs.size() != 1) throw Error(ErrorCode::kParseError, "vocabulary: multi-character token");
      in_chars_[cs[0]] = static_cast<int>(i);
    }
  }
  for (std::size_t i = 3; i < output_.size(); ++i) {
    const std::u32string cs = utf8::decode(output_[i]);
    if (cs.size() != 1) throw Error(ErrorCode::kParseError, "vocabulary: multi-character token");
    out_chars_[cs[0]] = static_cast<int>(i);
  }
}

std::vector<std::string> XlitVocab::languages() const {
  std::vector<std::string> out;
  for (const auto& [code, id] : tags_) out.push_back(code);
  return out;
}

std::optional<int> XlitVocab::tag_id(std::string_view lang_code) const {
  auto it = tags_.find(lang_code);
  if (it == tags_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> XlitVocab::encode_input(std::string_view word, std::string_view lang_code) const {
  const auto tag = tag_id(lang_code);
  if (!tag) {
    throw Error(ErrorCode::kInvalidInput, "model has no tag for language '" + std::string(lang_code) + "'");
  }
  std::vector<int> ids{kBosId, *tag};
  for (char32_t c : utf8::decode(word)) {
    auto it = in_chars_.find(c);
    if (it == in_chars_.end()) throw UnknownSymbol(c);
    ids.push_back(it->second);
  }
  ids.push_back(kEosId);
  return ids;
}

std::vector<int> XlitVocab::encode_output(std::string_view word) const {
  std::vector<int> ids;
  for (char32_t c : utf8::decode(word)) {
    auto it = out_chars_.find(c);
    if (it == out_chars_.end()) throw UnknownSymbol(c);
    ids.push_back(it->second);
  }
  return ids;
}

std::string XlitVocab::decode_output(const std::vector<int>& ids) const {
  std::string out;
  for (int id : ids) {
    if (id >= 3 && static_cast<std::size_t>(id) < output_.size()) out += output_[id];
  }
  return out;
}

const std::string& XlitVocab::source_of(const corpus::TransliterationPair& p) const {
  return direction_ == Direction::kRomanToNative ? p.roman : p.native;
}

const std::string& XlitVocab::target_of(const corpus::TransliterationPair& p) const {
  return direction_ == Direction::kRomanToNative ? p.native : p.roman;
}

XlitModel::XlitModel(XlitVocab vocab, const ModelConfig& config, std::uint64_t seed)
    : vocab_(std::move(vocab)), net_(config, vocab_.input_size(), vocab_.output_size()) {
  net_.init(seed);
}

double XlitModel::sequence_logprob(std::string_view source, std::string_view lang,
                                   std::string_view target) const {
  Batch b;
  b.add_pair(vocab_.encode_input(source, lang), vocab_.encode_output(target));
  const auto lp = net_.forward(b);
  const std::size_t v = vocab_.output_size();
  double s = 0.0;
  for (std::size_t i = 0; i < b.tgt_out.size(); ++i) s += lp[i * v + b.tgt_out[i]];
  return s;
}

std::string XlitModel::serialize() const {
  nlohmann::ordered_json h;
  h["format"] = "xlit-checkpoint";
  h["config"] = config_json(config());
  h["direction"] = to_string(vocab_.direction());
  h["input_tokens"] = vocab_.input_tokens();
  h["output_tokens"] = vocab_.output_tokens();
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& t : net_.layout().tensors()) {
    tensors.push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}});
  }
  h["tensors"] = tensors;
  h["dtype"] = "float32-le";
  const std::string header = h.dump();
  std::string out(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, header.size());
  out += header;
  out.reserve(out.size() + net_.params().size() * 4);
  for (float f : net_.params()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

XlitModel XlitModel::parse(std::string_view bytes) {
  auto bad = [](const std::string& m) -> void {
    throw Error(ErrorCode::kParseError, "checkpoint: " + m);
  };
  if (bytes.size() < 20 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) bad("bad magic");
  const auto version = get_le<std::uint32_t>(bytes, 8);
  if (version != kCheckpointVersion) bad("unsupported version " + std::to_string(version));
  const auto hlen = get_le<std::uint64_t>(bytes, 12);
  if (hlen > bytes.size() - 20) bad("truncated header");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(bytes.substr(20, hlen));
  } catch (const nlohmann::json::exception& e) {
    bad(std::string("header is not JSON: ") + e.what());
  }
  try {
    auto vocab = XlitVocab::from_tables(parse_direction(h.at("direction").get<std::string>()),
                                        h.at("input_tokens").get<std::vector<std::string>>(),
                                        h.at("output_tokens").get<std::vector<std::string>>());
    XlitModel m(std::move(vocab), config_from_json(h.at("config")), 0);
    const auto& want = m.net_.layout().tensors();
    const auto& have = h.at("tensors");
    if (have.size() != want.size()) {
      throw Error(ErrorCode::kShapeMismatch, "checkpoint tensor count does not match its config");
    }
    for (std::size_t i = 0; i < want.size(); ++i) {
      if (have[i].at("name") != want[i].name || have[i].at("rows") != want[i].rows ||
          have[i].at("cols") != want[i].cols) {
        throw Error(ErrorCode::kShapeMismatch, "checkpoint tensor " + want[i].name + " has the wrong shape");
      }
    }
    const std::size_t at = 20 + hlen;
    const std::size_t n = m.net_.params().size();
    if (bytes.size() != at + 4 * n) bad("payload size does not match the tensor table");
    for (std::size_t i = 0; i < n; ++i) {
      m.net_.params()[i] = std::bit_cast<float>(get_le<std::uint32_t>(bytes, at + 4 * i));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("checkpoint: ") + e.what());
  }
}

void XlitModel::save(const std::filesystem::path& path) const {
  text::write_file(path.string(), serialize());
}

XlitModel XlitModel::load(const std::filesystem::path& path) {
  return parse(text::read_file(path.string()));
}

std::size_t parameter_count(const ModelConfig& config, std::size_t input_vocab,
                            std::size_t output_vocab) {
  config.validate();
  return Layout(config, input_vocab, output_vocab).total();
}

std::size_t default_max_length(std::string_view source) {
  return 3 * utf8::length(source) + 8;
}

namespace {

struct Hyp {
  std::vector<int> tokens;  // starts with BOS
  double score = 0.0;
  std::string text;
};

struct Expansion {
  std::size_t parent;
  int token;
  double score;
  std::string text;
};

bool better(const Expansion& a, const Expansion& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.text != b.text) return a.text < b.text;
  return a.token < b.token;
}

bool better_candidate(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.text < b.text;
}

}  // namespace

std::vector<Candidate> beam_decode(const XlitModel& model, std::string_view source,
                                   std::string_view lang, int beam,
                                   std::optional<std::size_t> max_length) {
  if (beam < 1) throw Error(ErrorCode::kInvalidConfig, "beam size must be >= 1");
  const auto& vocab = model.vocab();
  const auto src = vocab.encode_input(source, lang);
  const std::size_t max_len = max_length.value_or(default_max_length(source));
  const auto mem = model.net().encode({src});
  const std::size_t v = vocab.output_size();
  const std::size_t b = static_cast<std::size_t>(beam);

  std::vector<Hyp> active{{{kBosId}, 0.0, ""}};
  std::vector<Candidate> finished;
  while (!active.empty()) {
    std::vector<std::vector<int>> prefixes;
    for (const auto& h : active) prefixes.push_back(h.tokens);
    const auto lp = model.net().next_logprobs(mem, prefixes, std::vector<std::size_t>(active.size(), 0));
    std::vector<Expansion> exp;
    for (std::size_t a = 0; a < active.size(); ++a) {
      const Hyp& h = active[a];
      const bool must_end = h.tokens.size() - 1 >= max_len;
      for (std::size_t t = 0; t < v; ++t) {
        if (t == kBosId || t == kPadId) continue;
        if (must_end && t != kEosId) continue;
        const double s = h.score + static_cast<double>(lp[a * v + t]);
        exp.push_back({a, static_cast<int>(t), s,
                       t == kEosId ? h.text : h.text + vocab.output_tokens()[t]});
      }
    }
    const std::size_t keep = std::min(b, exp.size());
    std::partial_sort(exp.begin(), exp.begin() + keep, exp.end(), better);
    std::vector<Hyp> next;
    for (std::size_t i = 0; i < keep; ++i) {
      const Expansion& e = exp[i];
      if (e.token == kEosId) {
        finished.push_back({e.text, e.score, std::nullopt});
      } else {
        Hyp h{active[e.parent].tokens, e.score, e.text};
        h.tokens.push_back(e.token);
        next.push_back(std::move(h));
      }
    }
    active = std::move(next);
    if (finished.size() >= b && !active.empty()) {
      std::sort(finished.begin(), finished.end(), better_candidate);
      // log probabilities only decrease, so no active hypothesis can
      // overtake the b-th finished one
      if (active.front().score < finished[b - 1].score) break;
    }
  }
  std::sort(finished.begin(), finished.end(), better_candidate);
  if (finished.size() > b) finished.resize(b);
  return finished;
}

void RerankConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::kInvalidConfig, "alpha must be in [0, 1]");
  if (k < 1) throw Error(ErrorCode::kInvalidConfig, "rerank k must be >= 1");
}

std::vector<Candidate> rerank(std::vector<Candidate> candidates, const lm::UnigramWordLM& lm,
                              const RerankConfig& config) {
  return rerank(std::move(candidates), [&lm](const std::string& w) { return lm.logprob(w); }, config);
}

std::vector<Candidate> rerank(std::vector<Candidate> candidates,
                              const std::function<double(const std::string&)>& word_logprob,
                              const RerankConfig& config) {
  config.validate();
  const std::size_t k = std::min(config.k, candidates.size());
  for (std::size_t i = 0; i < k; ++i) {
    auto& c = candidates[i];
    c.rerank_score = config.alpha * c.score + (1.0 - config.alpha) * word_logprob(c.text);
  }
  std::stable_sort(candidates.begin(), candidates.begin() + k, [](const Candidate& a, const Candidate& b) {
    if (*a.rerank_score != *b.rerank_score) return *a.rerank_score > *b.rerank_score;
    if (a.score != b.score) return a.score > b.score;
    return a.text < b.text;
  });
  return candidates;
}

}  // namespace xlit::model
