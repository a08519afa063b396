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
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <string>

#include "xlit/kernels.h"
#include "xlit/model.h"
#include "xlit/random.h"

namespace xlit::model {

void TrainConfig::validate() const {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::kInvalidConfig, m); };
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) bad("adam betas must be in [0, 1)");
  if (!(adam_eps > 0.0)) bad("adam epsilon must be positive");
  if (!(peak_lr > 0.0)) bad("peak learning rate must be positive");
  if (warmup_steps < 1) bad("warmup steps must be >= 1");
  if (batch_size < 1) bad("batch size must be >= 1");
  if (!(temperature > 0.0)) bad("temperature must be positive");
  if (max_epochs < 0) bad("max epochs must be >= 0");
}

double lr_at(std::int64_t step, const TrainConfig& config) {
  if (step < 1) throw Error(ErrorCode::kInvalidInput, "learning rate step must be >= 1");
  const double w = config.warmup_steps;
  const double s = static_cast<double>(step);
  if (s < w) return config.peak_lr * s / w;
  return config.peak_lr * std::sqrt(w / s);
}

std::vector<double> temperature_weights(const std::vector<std::size_t>& counts, double temperature) {
  if (!(temperature > 0.0)) throw Error(ErrorCode::kInvalidConfig, "temperature must be positive");
  if (counts.empty()) throw Error(ErrorCode::kInvalidInput, "no languages to weight");
  double total = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) throw Error(ErrorCode::kInvalidInput, "language with zero pairs");
    total += static_cast<double>(c);
  }
  std::vector<double> q;
  double z = 0.0;
  for (std::size_t c : counts) {
    q.push_back(std::pow(static_cast<double>(c) / total, 1.0 / temperature));
    z += q.back();
  }
  for (double& x : q) x /= z;
  return q;
}

namespace {

struct Example {
  std::vector<int> src;
  std::vector<int> tgt;
};

// Largest-remainder split of b slots by weight, at least one slot each
// when there are enough slots.
std::vector<std::size_t> allot(std::size_t b, const std::vector<double>& q) {
  const std::size_t n = q.size();
  std::vector<std::size_t> out(n, 0);
  std::size_t base = 0;
  if (b >= n) {
    std::fill(out.begin(), out.end(), 1);
    base = n;
  }
  const double rest = static_cast<double>(b - base);
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t used = base;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rest * q[i];
    const auto f = static_cast<std::size_t>(std::floor(x));
    out[i] += f;
    used += f;
    rem.push_back({x - static_cast<double>(f), i});
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& c) { return a.first > c.first; });
  for (std::size_t j = 0; used < b; ++j, ++used) ++out[rem[j % n].second];
  return out;
}

// Cycles through a language's examples, reshuffling on every pass.
class Stream {
 public:
  explicit Stream(std::size_t n) : order_(n) { std::iota(order_.begin(), order_.end(), 0); }
  std::size_t next(Rng& rng) {
    if (pos_ == 0) shuffle(order_, rng);
    const std::size_t i = order_[pos_];
    pos_ = (pos_ + 1) % order_.size();
    return i;
  }

 private:
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

double full_loss(const Transformer<float>& net, const std::vector<Example>& data) {
  constexpr std::size_t kChunk = 256;
  double sum = 0.0;
  std::size_t tokens = 0;
  for (std::size_t i = 0; i < data.size(); i += kChunk) {
    Batch b;
    std::size_t t = 0;
    for (std::size_t j = i; j < std::min(data.size(), i + kChunk); ++j) {
      b.add_pair(data[j].src, data[j].tgt);
      t += data[j].tgt.size() + 1;
    }
    sum += static_cast<double>(net.loss(b)) * static_cast<double>(t);
    tokens += t;
  }
  return sum / static_cast<double>(tokens);
}

}  // namespace

TrainResult train(const corpus::Lexicon& lexicon, const ModelConfig& model_config,
                  const TrainConfig& train_config, Direction direction,
                  const std::function<void(const EpochStats&)>& progress) {
  model_config.validate();
  train_config.validate();
  XlitModel model(XlitVocab::build(lexicon, direction), model_config, train_config.seed);
  return train(std::move(model), lexicon, train_config, progress);
}

TrainResult train(XlitModel model, const corpus::Lexicon& lexicon, const TrainConfig& cfg,
                  const std::function<void(const EpochStats&)>& progress) {
  cfg.validate();
  if (lexicon.empty()) throw Error(ErrorCode::kInvalidInput, "cannot train on an empty lexicon");
  const XlitVocab& vocab = model.vocab();

  std::vector<Example> data;
  std::map<std::string, std::vector<std::size_t>> by_lang;
  for (const auto& p : lexicon.pairs()) {
    by_lang[p.lang.code].push_back(data.size());
    data.push_back({vocab.encode_input(vocab.source_of(p), p.lang.code), vocab.encode_output(vocab.target_of(p))});
  }
  std::vector<std::size_t> counts;
  for (const auto& [code, idx] : by_lang) counts.push_back(idx.size());
  const std::size_t b = std::min(cfg.batch_size, data.size());
  const auto slots = allot(b, temperature_weights(counts, cfg.temperature));
  const std::int64_t steps_per_epoch = static_cast<std::int64_t>((data.size() + b - 1) / b);

  Transformer<float>& net = model.net();
  TrainResult result{model, 0.0, {}};
  result.initial_loss = full_loss(net, data);
  if (cfg.max_epochs == 0) return result;

  Rng sampler(cfg.seed);
  Rng dropout(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<Stream> streams;
  for (std::size_t c : counts) streams.emplace_back(c);
  std::vector<const std::vector<std::size_t>*> members;
  for (const auto& [code, idx] : by_lang) members.push_back(&idx);

  const std::size_t np = net.params().size();
  std::vector<float> grads(np), m(np, 0.0f), v(np, 0.0f);
  std::int64_t step = 0;
  if (!cfg.checkpoint_dir.empty()) std::filesystem::create_directories(cfg.checkpoint_dir);

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    double sum = 0.0;
    double lr = 0.0;
    for (std::int64_t s = 0; s < steps_per_epoch; ++s) {
      Batch batch;
      for (std::size_t l = 0; l < members.size(); ++l) {
        for (std::size_t j = 0; j < slots[l]; ++j) {
          const Example& e = data[(*members[l])[streams[l].next(sampler)]];
          batch.add_pair(e.src, e.tgt);
        }
      }
      const float loss = net.loss_and_grads(batch, grads, &dropout);
      if (!std::isfinite(loss)) {
        throw Error(ErrorCode::kTrainingDiverged,
                    "training diverged at epoch " + std::to_string(epoch) + " step " + std::to_string(step + 1) +
                        ": loss is not finite");
      }
      sum += loss;
      ++step;
      lr = lr_at(step, cfg);
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      const float b1 = static_cast<float>(cfg.beta1), b2 = static_cast<float>(cfg.beta2);
      const float a = static_cast<float>(lr / c1);
      const float r2 = static_cast<float>(1.0 / std::sqrt(c2));
      const float eps = static_cast<float>(cfg.adam_eps);
      float* w = net.params().data();
#pragma omp parallel for schedule(static) if (np > kernels::kParallelWork)
      for (std::size_t i = 0; i < np; ++i) {
        m[i] = b1 * m[i] + (1.0f - b1) * grads[i];
        v[i] = b2 * v[i] + (1.0f - b2) * grads[i] * grads[i];
        w[i] -= a * m[i] / (std::sqrt(v[i]) * r2 + eps);
      }
    }
    const double mean = sum / static_cast<double>(steps_per_epoch);
    result.epoch_loss.push_back(mean);
    if (!cfg.checkpoint_dir.empty()) {
      const std::filesystem::path dir(cfg.checkpoint_dir);
      model.save(dir / ("epoch_" + std::to_string(epoch) + ".ckpt"));
      model.save(dir / "last.ckpt");
    }
    if (progress) progress({epoch, mean, step, lr});
  }
  result.model = std::move(model);
  return result;
}

}  // namespace xlit::model
