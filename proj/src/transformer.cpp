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

#include "xlit/transformer.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xlit/error.h"
#include "xlit/kernels.h"

namespace xlit::model {

void ModelConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kInvalidConfig, m); };
  if (encoder_layers < 1 || decoder_layers < 1) fail("need at least one encoder and decoder layer");
  if (dim < 2 || dim % 2 != 0) fail("model dimension must be even and >= 2");
  if (heads < 1 || dim % heads != 0) fail("model dimension must be divisible by heads");
  if (ffn_dim < 1) fail("ffn dimension must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must be in [0, 1)");
  if (!(attention_dropout >= 0.0 && attention_dropout < 1.0)) {
    fail("attention dropout must be in [0, 1)");
  }
  if (!pre_norm) fail("only pre-norm blocks are supported");
}

Layout::Layout(const ModelConfig& config, std::size_t input_vocab, std::size_t output_vocab) {
  const std::size_t d = config.dim;
  const std::size_t f = config.ffn_dim;
  src_emb = add("encoder.embed", input_vocab, d);
  tgt_emb = add("decoder.embed", output_vocab, d);
  if (config.embed_layernorm) {
    enc_emb_ln = add_ln("encoder.embed_ln", d);
    dec_emb_ln = add_ln("decoder.embed_ln", d);
  }
  auto ffn = [&](const std::string& p) {
    FfnOff o;
    o.w1 = add(p + ".w1", d, f);
    o.b1 = add(p + ".b1", 1, f);
    o.w2 = add(p + ".w2", f, d);
    o.b2 = add(p + ".b2", 1, d);
    return o;
  };
  for (int l = 0; l < config.encoder_layers; ++l) {
    const std::string p = "encoder.layers." + std::to_string(l);
    EncoderOff e;
    e.ln1 = add_ln(p + ".attn_ln", d);
    e.attn = add_attn(p + ".attn", d);
    e.ln2 = add_ln(p + ".ffn_ln", d);
    e.ffn = ffn(p + ".ffn");
    enc.push_back(e);
  }
  for (int l = 0; l < config.decoder_layers; ++l) {
    const std::string p = "decoder.layers." + std::to_string(l);
    DecoderOff e;
    e.ln1 = add_ln(p + ".self_attn_ln", d);
    e.self = add_attn(p + ".self_attn", d);
    e.ln2 = add_ln(p + ".cross_attn_ln", d);
    e.cross = add_attn(p + ".cross_attn", d);
    e.ln3 = add_ln(p + ".ffn_ln", d);
    e.ffn = ffn(p + ".ffn");
    dec.push_back(e);
  }
  enc_ln = add_ln("encoder.final_ln", d);
  dec_ln = add_ln("decoder.final_ln", d);
  out_proj = add("decoder.out_proj", d, output_vocab);
}

std::size_t Layout::add(const std::string& name, std::size_t rows, std::size_t cols) {
  tensors_.push_back({name, total_, rows, cols});
  total_ += rows * cols;
  return tensors_.back().offset;
}

LnOff Layout::add_ln(const std::string& prefix, std::size_t d) {
  LnOff o;
  o.g = add(prefix + ".g", 1, d);
  o.b = add(prefix + ".b", 1, d);
  return o;
}

AttnOff Layout::add_attn(const std::string& prefix, std::size_t d) {
  AttnOff o;
  o.wq = add(prefix + ".wq", d, d);
  o.bq = add(prefix + ".bq", 1, d);
  o.wk = add(prefix + ".wk", d, d);
  o.bk = add(prefix + ".bk", 1, d);
  o.wv = add(prefix + ".wv", d, d);
  o.bv = add(prefix + ".bv", 1, d);
  o.wo = add(prefix + ".wo", d, d);
  o.bo = add(prefix + ".bo", 1, d);
  return o;
}

const TensorInfo* Layout::find(const std::string& name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::size_t Batch::add_source(const std::vector<int>& ids) {
  src_seg.push_back({src.size(), ids.size()});
  src.insert(src.end(), ids.begin(), ids.end());
  return src_seg.size() - 1;
}

void Batch::add_target(std::size_t source, const std::vector<int>& in, const std::vector<int>& out) {
  if (in.size() != out.size() || in.empty() || source >= src_seg.size()) {
    throw Error(ErrorCode::kShapeMismatch, "target input/label lengths differ or bad source");
  }
  tgt_seg.push_back({tgt_in.size(), in.size()});
  tgt_in.insert(tgt_in.end(), in.begin(), in.end());
  tgt_out.insert(tgt_out.end(), out.begin(), out.end());
  src_of.push_back(source);
}

void Batch::add_pair(const std::vector<int>& source, const std::vector<int>& target) {
  std::vector<int> in{kBosId};
  in.insert(in.end(), target.begin(), target.end());
  std::vector<int> out(target.begin(), target.end());
  out.push_back(kEosId);
  add_target(add_source(source), in, out);
}

namespace {

using Seg = Batch::Seg;

template <typename T>
using Vec = std::vector<T>;

template <typename T>
struct LnCache {
  Vec<T> y, xhat, rstd;
};

template <typename T>
struct AttnCache {
  Vec<T> q, k, v, o, out, probs, drop;
  std::vector<std::size_t> block;
};

template <typename T>
struct FfnCache {
  Vec<T> pre, act, out;
};

template <typename T>
struct EncLayerCache {
  LnCache<T> ln1;
  AttnCache<T> attn;
  Vec<T> drop1;
  LnCache<T> ln2;
  FfnCache<T> ffn;
  Vec<T> drop2;
};

template <typename T>
struct DecLayerCache {
  LnCache<T> ln1;
  AttnCache<T> self;
  Vec<T> drop1;
  LnCache<T> ln2;
  AttnCache<T> cross;
  Vec<T> drop2;
  LnCache<T> ln3;
  FfnCache<T> ffn;
  Vec<T> drop3;
};

template <typename T>
struct Cache {
  std::vector<std::uint8_t> src_pad, tgt_pad;
  LnCache<T> src_ln, tgt_ln;
  Vec<T> src_drop, tgt_drop;
  std::vector<EncLayerCache<T>> enc;
  LnCache<T> enc_ln;
  std::vector<DecLayerCache<T>> dec;
  LnCache<T> dec_ln;
  Vec<T> logp;
};

template <typename T>
class Engine {
 public:
  Engine(const ModelConfig& c, const Layout& l, const T* p, std::size_t vout)
      : cfg_(c), lay_(l), p_(p), vout_(vout), d_(c.dim), f_(c.ffn_dim), h_(c.heads),
        dk_(c.dim / c.heads) {}

  void encoder_fwd(const std::vector<int>& src, const std::vector<Seg>& seg, Cache<T>& c,
                   Rng* rng) const {
    const std::size_t n = src.size();
    c.src_pad.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) c.src_pad[i] = src[i] == kPadId;
    Vec<T> x;
    embed(src, seg, lay_.src_emb, lay_.enc_emb_ln, c.src_ln, c.src_drop, x, rng);
    std::vector<std::size_t> self_of(seg.size());
    for (std::size_t e = 0; e < seg.size(); ++e) self_of[e] = e;
    c.enc.assign(lay_.enc.size(), {});
    for (std::size_t l = 0; l < lay_.enc.size(); ++l) {
      const auto& o = lay_.enc[l];
      auto& lc = c.enc[l];
      ln_fwd(x.data(), n, o.ln1, lc.ln1);
      attn_fwd(o.attn, lc.ln1.y.data(), n, lc.ln1.y.data(), n, seg, seg, self_of, c.src_pad,
               false, lc.attn, rng);
      residual(x, lc.attn.out, lc.drop1, rng);
      ln_fwd(x.data(), n, o.ln2, lc.ln2);
      ffn_fwd(o.ffn, lc.ln2.y.data(), n, lc.ffn);
      residual(x, lc.ffn.out, lc.drop2, rng);
    }
    ln_fwd(x.data(), n, lay_.enc_ln, c.enc_ln);
  }

  void decoder_fwd(const std::vector<int>& tgt, const std::vector<Seg>& seg,
                   const std::vector<std::size_t>& src_of, const T* mem, std::size_t ns,
                   const std::vector<std::uint8_t>& src_pad, const std::vector<Seg>& src_seg,
                   Cache<T>& c, Rng* rng) const {
    const std::size_t n = tgt.size();
    c.tgt_pad.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) c.tgt_pad[i] = tgt[i] == kPadId;
    Vec<T> x;
    embed(tgt, seg, lay_.tgt_emb, lay_.dec_emb_ln, c.tgt_ln, c.tgt_drop, x, rng);
    std::vector<std::size_t> self_of(seg.size());
    for (std::size_t e = 0; e < seg.size(); ++e) self_of[e] = e;
    c.dec.assign(lay_.dec.size(), {});
    for (std::size_t l = 0; l < lay_.dec.size(); ++l) {
      const auto& o = lay_.dec[l];
      auto& lc = c.dec[l];
      ln_fwd(x.data(), n, o.ln1, lc.ln1);
      attn_fwd(o.self, lc.ln1.y.data(), n, lc.ln1.y.data(), n, seg, seg, self_of, c.tgt_pad, true,
               lc.self, rng);
      residual(x, lc.self.out, lc.drop1, rng);
      ln_fwd(x.data(), n, o.ln2, lc.ln2);
      attn_fwd(o.cross, lc.ln2.y.data(), n, mem, ns, seg, src_seg, src_of, src_pad, false,
               lc.cross, rng);
      residual(x, lc.cross.out, lc.drop2, rng);
      ln_fwd(x.data(), n, o.ln3, lc.ln3);
      ffn_fwd(o.ffn, lc.ln3.y.data(), n, lc.ffn);
      residual(x, lc.ffn.out, lc.drop3, rng);
    }
    ln_fwd(x.data(), n, lay_.dec_ln, c.dec_ln);
  }

  // Log-softmax of the output projection for the given decoder rows.
  Vec<T> project(const T* z, std::size_t rows) const {
    Vec<T> out(rows * vout_);
    kernels::matmul(z, p_ + lay_.out_proj, out.data(), rows, d_, vout_);
    for (std::size_t i = 0; i < rows; ++i) {
      T* r = out.data() + i * vout_;
      const T mx = *std::max_element(r, r + vout_);
      T s = 0;
      for (std::size_t j = 0; j < vout_; ++j) s += std::exp(r[j] - mx);
      const T lse = mx + std::log(s);
      for (std::size_t j = 0; j < vout_; ++j) r[j] -= lse;
    }
    return out;
  }

  void backward(const Batch& b, const Cache<T>& c, const Vec<T>& dlogits, T* g) const {
    const std::size_t nt = b.tgt_in.size();
    const std::size_t ns = b.src.size();
    Vec<T> dz(nt * d_);
    kernels::matmul_at_b(c.dec_ln.y.data(), dlogits.data(), g + lay_.out_proj, nt, d_, vout_);
    kernels::matmul_a_bt(dlogits.data(), p_ + lay_.out_proj, dz.data(), nt, vout_, d_);
    Vec<T> dx(nt * d_, T(0));
    ln_bwd(dz.data(), nt, lay_.dec_ln, c.dec_ln, dx.data(), g);
    Vec<T> dmem(ns * d_, T(0));
    std::vector<std::size_t> self_of(b.tgt_seg.size());
    for (std::size_t e = 0; e < self_of.size(); ++e) self_of[e] = e;
    const T* mem = c.enc_ln.y.data();
    for (std::size_t l = lay_.dec.size(); l-- > 0;) {
      const auto& o = lay_.dec[l];
      const auto& lc = c.dec[l];
      Vec<T> dout = masked(dx, lc.drop3);
      Vec<T> dy(nt * d_, T(0));
      ffn_bwd(o.ffn, lc.ln3.y.data(), nt, lc.ffn, dout.data(), dy.data(), g);
      ln_bwd(dy.data(), nt, o.ln3, lc.ln3, dx.data(), g);

      dout = masked(dx, lc.drop2);
      std::fill(dy.begin(), dy.end(), T(0));
      attn_bwd(o.cross, lc.ln2.y.data(), nt, mem, ns, b.tgt_seg, b.src_seg, b.src_of, lc.cross,
               dout.data(), dy.data(), dmem.data(), g);
      ln_bwd(dy.data(), nt, o.ln2, lc.ln2, dx.data(), g);

      dout = masked(dx, lc.drop1);
      std::fill(dy.begin(), dy.end(), T(0));
      attn_bwd(o.self, lc.ln1.y.data(), nt, lc.ln1.y.data(), nt, b.tgt_seg, b.tgt_seg, self_of,
               lc.self, dout.data(), dy.data(), dy.data(), g);
      ln_bwd(dy.data(), nt, o.ln1, lc.ln1, dx.data(), g);
    }
    embed_bwd(b.tgt_in, lay_.tgt_emb, lay_.dec_emb_ln, c.tgt_ln, c.tgt_drop, dx, g);

    Vec<T> dxs(ns * d_, T(0));
    ln_bwd(dmem.data(), ns, lay_.enc_ln, c.enc_ln, dxs.data(), g);
    std::vector<std::size_t> src_self(b.src_seg.size());
    for (std::size_t e = 0; e < src_self.size(); ++e) src_self[e] = e;
    for (std::size_t l = lay_.enc.size(); l-- > 0;) {
      const auto& o = lay_.enc[l];
      const auto& lc = c.enc[l];
      Vec<T> dout = masked(dxs, lc.drop2);
      Vec<T> dy(ns * d_, T(0));
      ffn_bwd(o.ffn, lc.ln2.y.data(), ns, lc.ffn, dout.data(), dy.data(), g);
      ln_bwd(dy.data(), ns, o.ln2, lc.ln2, dxs.data(), g);

      dout = masked(dxs, lc.drop1);
      std::fill(dy.begin(), dy.end(), T(0));
      attn_bwd(o.attn, lc.ln1.y.data(), ns, lc.ln1.y.data(), ns, b.src_seg, b.src_seg, src_self,
               lc.attn, dout.data(), dy.data(), dy.data(), g);
      ln_bwd(dy.data(), ns, o.ln1, lc.ln1, dxs.data(), g);
    }
    embed_bwd(b.src, lay_.src_emb, lay_.enc_emb_ln, c.src_ln, c.src_drop, dxs, g);
  }

 private:
  static constexpr T kEps = T(1e-5);

  T pe(std::size_t pos, std::size_t j) const {
    const double i2 = static_cast<double>(j - j % 2);
    const double angle = static_cast<double>(pos) / std::pow(10000.0, i2 / static_cast<double>(d_));
    return static_cast<T>(j % 2 == 0 ? std::sin(angle) : std::cos(angle));
  }

  void make_mask(Vec<T>& mask, std::size_t n, double p, Rng* rng) const {
    if (rng == nullptr || p <= 0.0) {
      mask.clear();
      return;
    }
    mask.resize(n);
    const T keep = static_cast<T>(1.0 / (1.0 - p));
    for (std::size_t i = 0; i < n; ++i) mask[i] = uniform_unit(*rng) < p ? T(0) : keep;
  }

  static Vec<T> masked(const Vec<T>& x, const Vec<T>& mask) {
    Vec<T> out(x);
    if (!mask.empty()) {
      for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
    }
    return out;
  }

  void residual(Vec<T>& x, Vec<T>& branch, Vec<T>& mask, Rng* rng) const {
    make_mask(mask, branch.size(), cfg_.dropout, rng);
    if (!mask.empty()) {
      for (std::size_t i = 0; i < branch.size(); ++i) branch[i] *= mask[i];
    }
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += branch[i];
  }

  void embed(const std::vector<int>& ids, const std::vector<Seg>& seg, std::size_t table,
             const LnOff& ln, LnCache<T>& lc, Vec<T>& drop, Vec<T>& x, Rng* rng) const {
    const std::size_t n = ids.size();
    const T scale = std::sqrt(static_cast<T>(d_));
    Vec<T> raw(n * d_);
    for (const Seg& s : seg) {
      for (std::size_t i = 0; i < s.len; ++i) {
        const std::size_t row = s.off + i;
        const T* e = p_ + table + static_cast<std::size_t>(ids[row]) * d_;
        for (std::size_t j = 0; j < d_; ++j) raw[row * d_ + j] = e[j] * scale + pe(i, j);
      }
    }
    if (cfg_.embed_layernorm) {
      ln_fwd(raw.data(), n, ln, lc);
      x = lc.y;
    } else {
      x = std::move(raw);
    }
    make_mask(drop, x.size(), cfg_.dropout, rng);
    if (!drop.empty()) {
      for (std::size_t i = 0; i < x.size(); ++i) x[i] *= drop[i];
    }
  }

  void embed_bwd(const std::vector<int>& ids, std::size_t table, const LnOff& ln,
                 const LnCache<T>& lc, const Vec<T>& drop, const Vec<T>& dx, T* g) const {
    const std::size_t n = ids.size();
    Vec<T> d = masked(dx, drop);
    Vec<T> draw;
    if (cfg_.embed_layernorm) {
      draw.assign(n * d_, T(0));
      ln_bwd(d.data(), n, ln, lc, draw.data(), g);
    } else {
      draw = std::move(d);
    }
    const T scale = std::sqrt(static_cast<T>(d_));
    for (std::size_t row = 0; row < n; ++row) {
      T* e = g + table + static_cast<std::size_t>(ids[row]) * d_;
      for (std::size_t j = 0; j < d_; ++j) e[j] += draw[row * d_ + j] * scale;
    }
  }

  void ln_fwd(const T* x, std::size_t n, const LnOff& o, LnCache<T>& c) const {
    c.y.resize(n * d_);
    c.xhat.resize(n * d_);
    c.rstd.resize(n);
    kernels::layernorm(x, p_ + o.g, p_ + o.b, c.y.data(), c.xhat.data(), c.rstd.data(), n, d_,
                       kEps);
  }

  void ln_bwd(const T* dy, std::size_t n, const LnOff& o, const LnCache<T>& c, T* dx, T* g) const {
    kernels::layernorm_backward(dy, c.xhat.data(), c.rstd.data(), p_ + o.g, dx, g + o.g, g + o.b,
                                n, d_);
  }

  void linear(const T* x, std::size_t n, std::size_t in, std::size_t out, std::size_t w,
              std::size_t b, Vec<T>& y) const {
    y.resize(n * out);
    kernels::matmul(x, p_ + w, y.data(), n, in, out);
    kernels::add_bias(y.data(), p_ + b, n, out);
  }

  void linear_bwd(const T* x, const T* dy, std::size_t n, std::size_t in, std::size_t out,
                  std::size_t w, std::size_t b, T* dx, T* g) const {
    kernels::matmul_at_b(x, dy, g + w, n, in, out);
    kernels::add_column_sums(dy, g + b, n, out);
    if (dx != nullptr) kernels::matmul_a_bt(dy, p_ + w, dx, n, out, in, true);
  }

  void ffn_fwd(const FfnOff& o, const T* y, std::size_t n, FfnCache<T>& c) const {
    linear(y, n, d_, f_, o.w1, o.b1, c.pre);
    c.act.resize(c.pre.size());
    kernels::gelu(c.pre.data(), c.act.data(), c.pre.size());
    linear(c.act.data(), n, f_, d_, o.w2, o.b2, c.out);
  }

  void ffn_bwd(const FfnOff& o, const T* y, std::size_t n, const FfnCache<T>& c, const T* dout,
               T* dy, T* g) const {
    Vec<T> dact(n * f_, T(0));
    linear_bwd(c.act.data(), dout, n, f_, d_, o.w2, o.b2, dact.data(), g);
    Vec<T> dpre(n * f_);
    kernels::gelu_backward(c.pre.data(), dact.data(), dpre.data(), n * f_);
    linear_bwd(y, dpre.data(), n, d_, f_, o.w1, o.b1, dy, g);
  }

  void attn_fwd(const AttnOff& o, const T* yq, std::size_t nq, const T* ykv, std::size_t nk,
                const std::vector<Seg>& qseg, const std::vector<Seg>& kseg,
                const std::vector<std::size_t>& kof, const std::vector<std::uint8_t>& kpad,
                bool causal, AttnCache<T>& c, Rng* rng) const {
    linear(yq, nq, d_, d_, o.wq, o.bq, c.q);
    linear(ykv, nk, d_, d_, o.wk, o.bk, c.k);
    linear(ykv, nk, d_, d_, o.wv, o.bv, c.v);
    c.block.resize(qseg.size());
    std::size_t total = 0;
    for (std::size_t e = 0; e < qseg.size(); ++e) {
      c.block[e] = total;
      total += qseg[e].len * kseg[kof[e]].len * h_;
    }
    c.probs.assign(total, T(0));
    const T scale = T(1) / std::sqrt(static_cast<T>(dk_));
    Vec<T> row;
    for (std::size_t e = 0; e < qseg.size(); ++e) {
      const Seg qs = qseg[e];
      const Seg ks = kseg[kof[e]];
      row.resize(ks.len);
      for (std::size_t h = 0; h < h_; ++h) {
        T* blk = c.probs.data() + c.block[e] + h * qs.len * ks.len;
        for (std::size_t i = 0; i < qs.len; ++i) {
          const T* qi = c.q.data() + (qs.off + i) * d_ + h * dk_;
          T mx = -std::numeric_limits<T>::infinity();
          for (std::size_t j = 0; j < ks.len; ++j) {
            if (kpad[ks.off + j] || (causal && j > i)) {
              row[j] = -std::numeric_limits<T>::infinity();
              continue;
            }
            const T* kj = c.k.data() + (ks.off + j) * d_ + h * dk_;
            T s = 0;
            for (std::size_t x = 0; x < dk_; ++x) s += qi[x] * kj[x];
            row[j] = s * scale;
            mx = std::max(mx, row[j]);
          }
          if (mx == -std::numeric_limits<T>::infinity()) continue;  // every key masked
          T sum = 0;
          for (std::size_t j = 0; j < ks.len; ++j) {
            const T p = std::isinf(row[j]) ? T(0) : std::exp(row[j] - mx);
            blk[i * ks.len + j] = p;
            sum += p;
          }
          for (std::size_t j = 0; j < ks.len; ++j) blk[i * ks.len + j] /= sum;
        }
      }
    }
    make_mask(c.drop, total, cfg_.attention_dropout, rng);
    c.o.assign(nq * d_, T(0));
    for (std::size_t e = 0; e < qseg.size(); ++e) {
      const Seg qs = qseg[e];
      const Seg ks = kseg[kof[e]];
      for (std::size_t h = 0; h < h_; ++h) {
        const std::size_t base = c.block[e] + h * qs.len * ks.len;
        for (std::size_t i = 0; i < qs.len; ++i) {
          T* oi = c.o.data() + (qs.off + i) * d_ + h * dk_;
          for (std::size_t j = 0; j < ks.len; ++j) {
            T w = c.probs[base + i * ks.len + j];
            if (!c.drop.empty()) w *= c.drop[base + i * ks.len + j];
            if (w == T(0)) continue;
            const T* vj = c.v.data() + (ks.off + j) * d_ + h * dk_;
            for (std::size_t x = 0; x < dk_; ++x) oi[x] += w * vj[x];
          }
        }
      }
    }
    linear(c.o.data(), nq, d_, d_, o.wo, o.bo, c.out);
  }

  void attn_bwd(const AttnOff& o, const T* yq, std::size_t nq, const T* ykv, std::size_t nk,
                const std::vector<Seg>& qseg, const std::vector<Seg>& kseg,
                const std::vector<std::size_t>& kof, const AttnCache<T>& c, const T* dout, T* dyq,
                T* dykv, T* g) const {
    Vec<T> dO(nq * d_, T(0));
    linear_bwd(c.o.data(), dout, nq, d_, d_, o.wo, o.bo, dO.data(), g);
    Vec<T> dq(nq * d_, T(0)), dk(nk * d_, T(0)), dv(nk * d_, T(0));
    const T scale = T(1) / std::sqrt(static_cast<T>(dk_));
    Vec<T> dp;
    for (std::size_t e = 0; e < qseg.size(); ++e) {
      const Seg qs = qseg[e];
      const Seg ks = kseg[kof[e]];
      dp.resize(ks.len);
      for (std::size_t h = 0; h < h_; ++h) {
        const std::size_t base = c.block[e] + h * qs.len * ks.len;
        for (std::size_t i = 0; i < qs.len; ++i) {
          const T* doi = dO.data() + (qs.off + i) * d_ + h * dk_;
          const T* qi = c.q.data() + (qs.off + i) * d_ + h * dk_;
          T* dqi = dq.data() + (qs.off + i) * d_ + h * dk_;
          T wsum = 0;
          for (std::size_t j = 0; j < ks.len; ++j) {
            const T p = c.probs[base + i * ks.len + j];
            const T m = c.drop.empty() ? T(1) : c.drop[base + i * ks.len + j];
            if (p == T(0)) {
              dp[j] = 0;
              continue;
            }
            const T* vj = c.v.data() + (ks.off + j) * d_ + h * dk_;
            T* dvj = dv.data() + (ks.off + j) * d_ + h * dk_;
            T s = 0;
            for (std::size_t x = 0; x < dk_; ++x) {
              s += doi[x] * vj[x];
              dvj[x] += p * m * doi[x];
            }
            dp[j] = s * m;
            wsum += p * dp[j];
          }
          for (std::size_t j = 0; j < ks.len; ++j) {
            const T p = c.probs[base + i * ks.len + j];
            if (p == T(0)) continue;
            const T ds = p * (dp[j] - wsum) * scale;
            const T* kj = c.k.data() + (ks.off + j) * d_ + h * dk_;
            T* dkj = dk.data() + (ks.off + j) * d_ + h * dk_;
            for (std::size_t x = 0; x < dk_; ++x) {
              dqi[x] += ds * kj[x];
              dkj[x] += ds * qi[x];
            }
          }
        }
      }
    }
    linear_bwd(yq, dq.data(), nq, d_, d_, o.wq, o.bq, dyq, g);
    linear_bwd(ykv, dk.data(), nk, d_, d_, o.wk, o.bk, dykv, g);
    linear_bwd(ykv, dv.data(), nk, d_, d_, o.wv, o.bv, dykv, g);
  }

  const ModelConfig& cfg_;
  const Layout& lay_;
  const T* p_;
  std::size_t vout_, d_, f_, h_, dk_;
};

template <typename T>
void check_batch(const Batch& b, std::size_t vin, std::size_t vout) {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::kShapeMismatch, m); };
  if (b.tgt_seg.size() != b.src_of.size() || b.tgt_in.size() != b.tgt_out.size()) {
    bad("inconsistent batch");
  }
  for (int id : b.src) {
    if (id < 0 || static_cast<std::size_t>(id) >= vin) bad("source id out of range");
  }
  for (std::size_t i = 0; i < b.tgt_in.size(); ++i) {
    if (b.tgt_in[i] < 0 || static_cast<std::size_t>(b.tgt_in[i]) >= vout ||
        b.tgt_out[i] < 0 || static_cast<std::size_t>(b.tgt_out[i]) >= vout) {
      bad("target id out of range");
    }
  }
  for (std::size_t s : b.src_of) {
    if (s >= b.src_seg.size()) bad("target refers to a missing source");
  }
}

template <typename T>
T forward_all(const Engine<T>& eng, const Batch& b, Cache<T>& c, Rng* rng, Vec<T>* dlogits,
              std::size_t vout) {
  eng.encoder_fwd(b.src, b.src_seg, c, rng);
  eng.decoder_fwd(b.tgt_in, b.tgt_seg, b.src_of, c.enc_ln.y.data(), b.src.size(), c.src_pad,
                  b.src_seg, c, rng);
  c.logp = eng.project(c.dec_ln.y.data(), b.tgt_in.size());
  std::size_t count = 0;
  for (int y : b.tgt_out) count += y != kPadId;
  if (dlogits != nullptr) dlogits->assign(c.logp.size(), T(0));
  if (count == 0) return T(0);
  T loss = 0;
  const T inv = T(1) / static_cast<T>(count);
  for (std::size_t i = 0; i < b.tgt_out.size(); ++i) {
    const int y = b.tgt_out[i];
    if (y == kPadId) continue;
    loss -= c.logp[i * vout + y];
    if (dlogits != nullptr) {
      T* dr = dlogits->data() + i * vout;
      for (std::size_t j = 0; j < vout; ++j) dr[j] = std::exp(c.logp[i * vout + j]) * inv;
      dr[y] -= inv;
    }
  }
  return loss * inv;
}

}  // namespace

template <typename T>
Transformer<T>::Transformer(const ModelConfig& config, std::size_t input_vocab,
                            std::size_t output_vocab)
    : config_(config), vin_(input_vocab), vout_(output_vocab),
      layout_((config.validate(), config), input_vocab, output_vocab),
      params_(layout_.total(), T(0)) {}

template <typename T>
void Transformer<T>::init(std::uint64_t seed) {
  Rng rng(seed);
  for (const auto& t : layout_.tensors()) {
    T* p = params_.data() + t.offset;
    const std::string& n = t.name;
    const auto ends = [&](const char* s) {
      const std::size_t l = std::char_traits<char>::length(s);
      return n.size() >= l && n.compare(n.size() - l, l, s) == 0;
    };
    if (ends(".g")) {
      std::fill(p, p + t.size(), T(1));
    } else if (t.rows == 1) {
      std::fill(p, p + t.size(), T(0));
    } else {
      const bool table = ends(".embed");
      const double bound = 1.0 / std::sqrt(static_cast<double>(table ? t.cols : t.rows));
      for (std::size_t i = 0; i < t.size(); ++i) {
        p[i] = static_cast<T>((2.0 * uniform_unit(rng) - 1.0) * bound);
      }
    }
  }
}

template <typename T>
std::vector<T> Transformer<T>::forward(const Batch& batch) const {
  check_batch<T>(batch, vin_, vout_);
  Engine<T> eng(config_, layout_, params_.data(), vout_);
  Cache<T> c;
  forward_all<T>(eng, batch, c, nullptr, nullptr, vout_);
  return std::move(c.logp);
}

template <typename T>
T Transformer<T>::loss(const Batch& batch) const {
  check_batch<T>(batch, vin_, vout_);
  Engine<T> eng(config_, layout_, params_.data(), vout_);
  Cache<T> c;
  return forward_all<T>(eng, batch, c, nullptr, nullptr, vout_);
}

template <typename T>
T Transformer<T>::loss_and_grads(const Batch& batch, std::vector<T>& grads, Rng* rng) const {
  check_batch<T>(batch, vin_, vout_);
  Engine<T> eng(config_, layout_, params_.data(), vout_);
  Cache<T> c;
  Vec<T> dlogits;
  const T loss = forward_all(eng, batch, c, rng, &dlogits, vout_);
  grads.assign(params_.size(), T(0));
  eng.backward(batch, c, dlogits, grads.data());
  return loss;
}

template <typename T>
typename Transformer<T>::Memory Transformer<T>::encode(
    const std::vector<std::vector<int>>& sources) const {
  Batch b;
  for (const auto& s : sources) {
    for (int id : s) {
      if (id < 0 || static_cast<std::size_t>(id) >= vin_) {
        throw Error(ErrorCode::kShapeMismatch, "source id out of range");
      }
    }
    b.add_source(s);
  }
  Engine<T> eng(config_, layout_, params_.data(), vout_);
  Cache<T> c;
  eng.encoder_fwd(b.src, b.src_seg, c, nullptr);
  return {std::move(c.enc_ln.y), std::move(c.src_pad), std::move(b.src_seg), std::move(b.src)};
}

template <typename T>
std::vector<T> Transformer<T>::next_logprobs(const Memory& memory,
                                             const std::vector<std::vector<int>>& prefixes,
                                             const std::vector<std::size_t>& src_of) const {
  if (prefixes.size() != src_of.size()) {
    throw Error(ErrorCode::kShapeMismatch, "one source index per prefix required");
  }
  std::vector<int> tgt;
  std::vector<Seg> seg;
  for (std::size_t i = 0; i < prefixes.size(); ++i) {
    if (prefixes[i].empty() || src_of[i] >= memory.seg.size()) {
      throw Error(ErrorCode::kShapeMismatch, "empty prefix or bad source index");
    }
    seg.push_back({tgt.size(), prefixes[i].size()});
    for (int id : prefixes[i]) {
      if (id < 0 || static_cast<std::size_t>(id) >= vout_) {
        throw Error(ErrorCode::kShapeMismatch, "target id out of range");
      }
      tgt.push_back(id);
    }
  }
  Engine<T> eng(config_, layout_, params_.data(), vout_);
  Cache<T> c;
  eng.decoder_fwd(tgt, seg, src_of, memory.mem.data(), memory.src.size(), memory.pad, memory.seg, c,
                  nullptr);
  const std::size_t d = config_.dim;
  Vec<T> last(prefixes.size() * d);
  for (std::size_t i = 0; i < seg.size(); ++i) {
    const std::size_t row = seg[i].off + seg[i].len - 1;
    std::copy(c.dec_ln.y.begin() + row * d, c.dec_ln.y.begin() + (row + 1) * d,
              last.begin() + i * d);
  }
  return eng.project(last.data(), prefixes.size());
}

template class Transformer<float>;
template class Transformer<double>;

}  // namespace xlit::model
