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

// Pre-norm transformer encoder-decoder with hand-written backward pass.
// Parameters live in one flat vector; Layout names every tensor in it.

#ifndef XLIT_TRANSFORMER_H_
#define XLIT_TRANSFORMER_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "xlit/random.h"

namespace xlit::model {

// Token ids shared by both vocabularies.
inline constexpr int kBosId = 0;
inline constexpr int kEosId = 1;
inline constexpr int kPadId = 2;

struct ModelConfig {
  int encoder_layers = 2;
  int decoder_layers = 2;
  int dim = 64;
  int ffn_dim = 128;
  int heads = 2;
  double dropout = 0.1;
  double attention_dropout = 0.0;
  bool embed_layernorm = true;
  // Only pre-norm blocks are implemented; false is rejected by validate().
  bool pre_norm = true;

  static ModelConfig desk() { return {}; }
  static ModelConfig paper() { return {6, 6, 256, 1024, 4, 0.5, 0.0, true, true}; }

  // Throws Error(kInvalidConfig).
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

struct TensorInfo {
  std::string name;
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t size() const { return rows * cols; }
};

struct LnOff {
  std::size_t g = 0, b = 0;
};
struct AttnOff {
  std::size_t wq = 0, bq = 0, wk = 0, bk = 0, wv = 0, bv = 0, wo = 0, bo = 0;
};
struct FfnOff {
  std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0;
};
struct EncoderOff {
  LnOff ln1;
  AttnOff attn;
  LnOff ln2;
  FfnOff ffn;
};
struct DecoderOff {
  LnOff ln1;
  AttnOff self;
  LnOff ln2;
  AttnOff cross;
  LnOff ln3;
  FfnOff ffn;
};

class Layout {
 public:
  Layout(const ModelConfig& config, std::size_t input_vocab, std::size_t output_vocab);

  std::size_t src_emb = 0, tgt_emb = 0, out_proj = 0;
  LnOff enc_emb_ln, dec_emb_ln, enc_ln, dec_ln;
  std::vector<EncoderOff> enc;
  std::vector<DecoderOff> dec;

  const std::vector<TensorInfo>& tensors() const { return tensors_; }
  std::size_t total() const { return total_; }
  // nullptr when absent.
  const TensorInfo* find(const std::string& name) const;

 private:
  std::size_t add(const std::string& name, std::size_t rows, std::size_t cols);
  LnOff add_ln(const std::string& prefix, std::size_t d);
  AttnOff add_attn(const std::string& prefix, std::size_t d);

  std::vector<TensorInfo> tensors_;
  std::size_t total_ = 0;
};

// Variable-length sequences packed back to back. Target segment e attends
// to source segment src_of[e]; several targets may share one source.
struct Batch {
  struct Seg {
    std::size_t off = 0, len = 0;
  };
  std::vector<int> src;
  std::vector<int> tgt_in;
  std::vector<int> tgt_out;  // labels aligned with tgt_in; kPadId is ignored
  std::vector<Seg> src_seg;
  std::vector<Seg> tgt_seg;
  std::vector<std::size_t> src_of;

  std::size_t add_source(const std::vector<int>& ids);
  void add_target(std::size_t source, const std::vector<int>& in, const std::vector<int>& out);
  // in = [BOS, tgt...], out = [tgt..., EOS]
  void add_pair(const std::vector<int>& source, const std::vector<int>& target);
  std::size_t size() const { return tgt_seg.size(); }
};

template <typename T>
class Transformer {
 public:
  Transformer(const ModelConfig& config, std::size_t input_vocab, std::size_t output_vocab);

  const ModelConfig& config() const { return config_; }
  const Layout& layout() const { return layout_; }
  std::size_t input_vocab() const { return vin_; }
  std::size_t output_vocab() const { return vout_; }
  std::vector<T>& params() { return params_; }
  const std::vector<T>& params() const { return params_; }

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases, unit
  // layer-norm gains.
  void init(std::uint64_t seed);

  // Log-probabilities [tgt tokens, output vocab], one row per decoder input
  // position. Dropout off.
  std::vector<T> forward(const Batch& batch) const;

  // Mean cross-entropy over non-PAD labels. grads is resized to the
  // parameter count and overwritten. Dropout is applied when rng is given.
  T loss_and_grads(const Batch& batch, std::vector<T>& grads, Rng* rng = nullptr) const;
  T loss(const Batch& batch) const;

  // Incremental use for decoding: encode once, then score next tokens.
  struct Memory {
    std::vector<T> mem;
    std::vector<std::uint8_t> pad;
    std::vector<Batch::Seg> seg;
    std::vector<int> src;
  };
  Memory encode(const std::vector<std::vector<int>>& sources) const;
  // Log-probabilities [prefixes, output vocab] of the token following each
  // prefix; prefix i reads source src_of[i].
  std::vector<T> next_logprobs(const Memory& memory, const std::vector<std::vector<int>>& prefixes,
                               const std::vector<std::size_t>& src_of) const;

 private:
  ModelConfig config_;
  std::size_t vin_, vout_;
  Layout layout_;
  std::vector<T> params_;
};

extern template class Transformer<float>;
extern template class Transformer<double>;

}  // namespace xlit::model

#endif  // XLIT_TRANSFORMER_H_
