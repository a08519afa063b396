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

// Character-level transliteration model: vocabularies with language-tag
// tokens, checkpoints, training, beam search and unigram-LM reranking.

#ifndef XLIT_MODEL_H_
#define XLIT_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xlit/corpus.h"
#include "xlit/error.h"
#include "xlit/lm.h"
#include "xlit/transformer.h"

namespace xlit::model {

class UnknownSymbol : public Error {
 public:
  explicit UnknownSymbol(char32_t symbol);
  char32_t symbol() const noexcept { return symbol_; }

 private:
  char32_t symbol_;
};

enum class Direction { kRomanToNative, kNativeToRoman };

std::string_view to_string(Direction direction);
Direction parse_direction(std::string_view name);

class XlitVocab {
 public:
  // Specials first, then "<lang>" tags sorted, then characters by code
  // point. Throws Error(kInvalidInput) for an empty lexicon.
  static XlitVocab build(const corpus::Lexicon& lexicon,
                         Direction direction = Direction::kRomanToNative);
  // Rebuilds from stored token tables (checkpoints). Throws
  // Error(kParseError) when the tables are malformed.
  static XlitVocab from_tables(Direction direction, std::vector<std::string> input,
                               std::vector<std::string> output);

  Direction direction() const { return direction_; }
  const std::vector<std::string>& input_tokens() const { return input_; }
  const std::vector<std::string>& output_tokens() const { return output_; }
  std::size_t input_size() const { return input_.size(); }
  std::size_t output_size() const { return output_.size(); }
  std::vector<std::string> languages() const;
  std::optional<int> tag_id(std::string_view lang_code) const;

  // [BOS, <lang>, chars..., EOS]. Throws UnknownSymbol for a character
  // outside the input table and Error(kInvalidInput) for an unknown tag.
  std::vector<int> encode_input(std::string_view word, std::string_view lang_code) const;
  // Character ids only. Throws UnknownSymbol.
  std::vector<int> encode_output(std::string_view word) const;
  // Specials are skipped.
  std::string decode_output(const std::vector<int>& ids) const;

  // The side of a pair this vocabulary reads, and the side it writes.
  const std::string& source_of(const corpus::TransliterationPair& p) const;
  const std::string& target_of(const corpus::TransliterationPair& p) const;

  bool operator==(const XlitVocab& o) const {
    return direction_ == o.direction_ && input_ == o.input_ && output_ == o.output_;
  }

 private:
  void index();

  Direction direction_ = Direction::kRomanToNative;
  std::vector<std::string> input_;
  std::vector<std::string> output_;
  std::map<char32_t, int> in_chars_;
  std::map<std::string, int, std::less<>> tags_;
  std::map<char32_t, int> out_chars_;
};

class XlitModel {
 public:
  XlitModel(XlitVocab vocab, const ModelConfig& config, std::uint64_t seed);

  const XlitVocab& vocab() const { return vocab_; }
  const ModelConfig& config() const { return net_.config(); }
  Transformer<float>& net() { return net_; }
  const Transformer<float>& net() const { return net_; }
  std::size_t parameter_count() const { return net_.params().size(); }

  // Teacher-forced sum of log probabilities of target followed by EOS.
  double sequence_logprob(std::string_view source, std::string_view lang,
                          std::string_view target) const;

  // "XLITCKPT", u32 version, u64 header length, JSON header (config,
  // direction, token tables, tensor table), then every tensor as
  // little-endian float32 in header order.
  std::string serialize() const;
  static XlitModel parse(std::string_view bytes);
  void save(const std::filesystem::path& path) const;
  static XlitModel load(const std::filesystem::path& path);

 private:
  XlitVocab vocab_;
  Transformer<float> net_;
};

// Parameter count for a configuration without allocating the model.
std::size_t parameter_count(const ModelConfig& config, std::size_t input_vocab,
                            std::size_t output_vocab);

struct Candidate {
  std::string text;
  double score = 0.0;                 // T_c: summed token log probabilities
  std::optional<double> rerank_score;  // F_c

  bool operator==(const Candidate&) const = default;
};

// 3 * characters + 8
std::size_t default_max_length(std::string_view source);

// At most beam candidates, sorted by score descending with ties broken by
// text. No length normalization. EOS is forced once max_length characters
// have been produced. Throws Error(kInvalidConfig) for beam < 1.
std::vector<Candidate> beam_decode(const XlitModel& model, std::string_view source,
                                   std::string_view lang, int beam,
                                   std::optional<std::size_t> max_length = std::nullopt);

struct RerankConfig {
  double alpha = 0.9;
  std::size_t k = 4;
  void validate() const;
};

// Rescores the top k candidates with F = alpha*T + (1-alpha)*P and sorts
// them by F; the rest keep their order behind the rescored block.
std::vector<Candidate> rerank(std::vector<Candidate> candidates, const lm::UnigramWordLM& lm,
                              const RerankConfig& config = {});
// Same with any word log-probability P.
std::vector<Candidate> rerank(std::vector<Candidate> candidates,
                              const std::function<double(const std::string&)>& word_logprob,
                              const RerankConfig& config = {});

struct TrainConfig {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double adam_eps = 1e-8;
  double peak_lr = 1e-3;
  int warmup_steps = 4000;
  std::size_t batch_size = 4096;
  double temperature = 1.5;
  int max_epochs = 50;
  std::uint64_t seed = 1;
  std::string checkpoint_dir;  // empty: no checkpoints

  static TrainConfig paper() { return {}; }
  void validate() const;
};

// Linear warmup to peak at step == warmup, then peak * sqrt(warmup / step).
double lr_at(std::int64_t step, const TrainConfig& config);

// q_l proportional to (n_l / sum n)^(1/T).
std::vector<double> temperature_weights(const std::vector<std::size_t>& counts, double temperature);

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;  // mean over the epoch's batches, dropout on
  std::int64_t step = 0;
  double lr = 0.0;
};

struct TrainResult {
  XlitModel model;
  double initial_loss = 0.0;  // full training set, dropout off
  std::vector<double> epoch_loss;
};

// Adam with the lr_at schedule. Each batch holds examples from every
// language, allotted by temperature_weights. Deterministic for a seed.
// Throws Error(kTrainingDiverged) when the loss stops being finite.
TrainResult train(const corpus::Lexicon& lexicon, const ModelConfig& model_config,
                  const TrainConfig& train_config, Direction direction = Direction::kRomanToNative,
                  const std::function<void(const EpochStats&)>& progress = {});

// Same, continuing from an existing model (its vocabulary must cover the
// lexicon).
TrainResult train(XlitModel model, const corpus::Lexicon& lexicon, const TrainConfig& train_config,
                  const std::function<void(const EpochStats&)>& progress = {});

}  // namespace xlit::model

#endif  // XLIT_MODEL_H_
