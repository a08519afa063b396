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

#include "doctest.h"
#include "oracle/gradcheck.h"
#include "xlit/error.h"
#include "xlit/kernels.h"
#include "xlit/transformer.h"

using namespace xlit;
using namespace xlit::model;

namespace {

ModelConfig tiny() {
  ModelConfig c;
  c.encoder_layers = 2;
  c.decoder_layers = 2;
  c.dim = 8;
  c.ffn_dim = 12;
  c.heads = 2;
  c.dropout = 0.0;
  return c;
}

}  // namespace

TEST_CASE("config validation") {
  ModelConfig c = tiny();
  c.heads = 3;
  CHECK_THROWS_AS(c.validate(), Error);
  c = tiny();
  c.dropout = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = tiny();
  c.pre_norm = false;
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK_NOTHROW(ModelConfig::desk().validate());
  CHECK_NOTHROW(ModelConfig::paper().validate());
}

TEST_CASE("parallel kernels agree with the serial reference") {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (auto [n, k, m] : {std::tuple<int, int, int>{3, 5, 7}, {64, 64, 64}, {130, 70, 90}}) {
    std::vector<double> a(n * k), b(k * m), bt(m * k), c1(n * m), c2(n * m);
    for (auto& x : a) x = u(rng);
    for (auto& x : b) x = u(rng);
    for (auto& x : bt) x = u(rng);
    kernels::matmul(a.data(), b.data(), c1.data(), n, k, m);
    kernels::serial::matmul(a.data(), b.data(), c2.data(), n, k, m);
    for (int i = 0; i < n * m; ++i) CHECK(c1[i] == doctest::Approx(c2[i]).epsilon(1e-12));

    std::vector<double> g1(k * m, 0.5), g2(k * m, 0.5), dy(n * m);
    for (auto& x : dy) x = u(rng);
    kernels::matmul_at_b(a.data(), dy.data(), g1.data(), n, k, m);
    kernels::serial::matmul_at_b(a.data(), dy.data(), g2.data(), n, k, m);
    for (int i = 0; i < k * m; ++i) CHECK(g1[i] == doctest::Approx(g2[i]).epsilon(1e-12));

    std::vector<double> d1(n * k), d2(n * k);
    kernels::matmul_a_bt(dy.data(), bt.data(), d1.data(), n, m, k);
    kernels::serial::matmul_a_bt(dy.data(), bt.data(), d2.data(), n, m, k);
    for (int i = 0; i < n * k; ++i) CHECK(d1[i] == doctest::Approx(d2[i]).epsilon(1e-12));
  }
}

TEST_CASE("gradient check in double precision") {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 3; ++trial) {
    Transformer<double> net(tiny(), 7, 6);
    oracle::randomize(net, rng);
    auto batch = oracle::random_batch(rng, 2, 7, 6);
    auto errs = oracle::gradcheck(net, batch);
    CHECK(errs.size() == net.layout().tensors().size());
    for (const auto& [name, e] : errs) {
      INFO(name, " rel=", e.max_rel, " abs=", e.max_abs);
      CHECK(e.max_rel < 1e-3);
    }
  }
}

TEST_CASE("gradient check without embedding layer norm and with padding") {
  std::mt19937 rng(7);
  ModelConfig c = tiny();
  c.embed_layernorm = false;
  Transformer<double> net(c, 7, 6);
  oracle::randomize(net, rng);
  Batch b;
  b.add_target(b.add_source({0, 4, 5, 1, kPadId, kPadId}), {0, 3, 4, kPadId}, {3, 4, 1, kPadId});
  b.add_pair({0, 6, 3, 1}, {5});
  for (const auto& [name, e] : oracle::gradcheck(net, b)) {
    INFO(name, " rel=", e.max_rel);
    CHECK(e.max_rel < 1e-3);
  }
}

TEST_CASE("softmax rows are normalized") {
  std::mt19937 rng(3);
  Transformer<float> net(ModelConfig::desk(), 20, 30);
  net.init(5);
  for (int t = 0; t < 5; ++t) {
    auto b = oracle::random_batch(rng, 4, 20, 30);
    auto lp = net.forward(b);
    for (std::size_t r = 0; r < b.tgt_in.size(); ++r) {
      double s = 0;
      for (std::size_t j = 0; j < 30; ++j) {
        const double p = std::exp(lp[r * 30 + j]);
        CHECK(p > 0.0);
        CHECK(p < 1.0);
        s += p;
      }
      CHECK(std::abs(s - 1.0) <= 1e-5);
    }
  }
}

TEST_CASE("uniform output gives ln V loss") {
  Transformer<double> net(tiny(), 7, 5);
  net.init(1);
  const auto* out = net.layout().find("decoder.out_proj");
  REQUIRE(out != nullptr);
  std::fill(net.params().begin() + out->offset, net.params().begin() + out->offset + out->size(), 0.0);
  std::mt19937 rng(2);
  auto b = oracle::random_batch(rng, 3, 7, 5);
  CHECK(net.loss(b) == doctest::Approx(std::log(5.0)).epsilon(1e-12));
}

TEST_CASE("duplicated batch has the same mean loss") {
  Transformer<double> net(tiny(), 7, 6);
  net.init(9);
  Batch one, two;
  one.add_pair({0, 3, 4, 1}, {3, 5});
  two.add_pair({0, 3, 4, 1}, {3, 5});
  two.add_pair({0, 3, 4, 1}, {3, 5});
  CHECK(net.loss(one) == doctest::Approx(net.loss(two)).epsilon(1e-12));
}

TEST_CASE("causality") {
  std::mt19937 rng(4);
  Transformer<double> net(tiny(), 9, 9);
  oracle::randomize(net, rng);
  Batch a, b;
  a.add_target(a.add_source({0, 3, 4, 5, 1}), {0, 3, 4, 5, 6}, {3, 4, 5, 6, 1});
  b.add_target(b.add_source({0, 3, 4, 5, 1}), {0, 3, 4, 8, 7}, {3, 4, 8, 7, 1});
  auto la = net.forward(a);
  auto lb = net.forward(b);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t j = 0; j < 9; ++j) CHECK(la[r * 9 + j] == lb[r * 9 + j]);
  }
  bool later_differs = false;
  for (std::size_t j = 0; j < 9; ++j) later_differs |= la[3 * 9 + j] != lb[3 * 9 + j];
  CHECK(later_differs);
}

TEST_CASE("padding invariance") {
  std::mt19937 rng(6);
  Transformer<double> net(tiny(), 9, 9);
  oracle::randomize(net, rng);
  Batch plain, padded, shuffled;
  plain.add_target(plain.add_source({0, 3, 4, 1}), {0, 5, 6}, {5, 6, 1});
  padded.add_target(padded.add_source({0, 3, 4, 1, kPadId, kPadId, kPadId}),
                    {0, 5, 6, kPadId, kPadId}, {5, 6, 1, kPadId, kPadId});
  // same entry next to a different one, pads in the tail
  shuffled.add_pair({0, 7, 8, 7, 1}, {4, 4, 4});
  shuffled.add_target(shuffled.add_source({0, 3, 4, 1, kPadId, kPadId, kPadId}),
                      {0, 5, 6, kPadId, kPadId}, {5, 6, 1, kPadId, kPadId});
  auto lp = net.forward(plain);
  auto lq = net.forward(padded);
  auto ls = net.forward(shuffled);
  const std::size_t off = shuffled.tgt_seg[1].off;
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t j = 0; j < 9; ++j) {
      CHECK(lp[r * 9 + j] == doctest::Approx(lq[r * 9 + j]).epsilon(1e-12));
      CHECK(lp[r * 9 + j] == doctest::Approx(ls[(off + r) * 9 + j]).epsilon(1e-12));
    }
  }
  CHECK(net.loss(plain) == doctest::Approx(net.loss(padded)).epsilon(1e-12));
}

TEST_CASE("incremental scoring matches full forward") {
  std::mt19937 rng(8);
  Transformer<float> net(tiny(), 9, 9);
  net.init(3);
  Batch b;
  b.add_target(b.add_source({0, 3, 4, 1}), {0, 5, 6, 7}, {5, 6, 7, 1});
  auto full = net.forward(b);
  auto mem = net.encode({{0, 3, 4, 1}});
  auto next = net.next_logprobs(mem, {{0}, {0, 5}, {0, 5, 6}, {0, 5, 6, 7}}, {0, 0, 0, 0});
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t j = 0; j < 9; ++j) CHECK(next[r * 9 + j] == doctest::Approx(full[r * 9 + j]).epsilon(1e-5));
  }
}

TEST_CASE("shape errors") {
  Transformer<float> net(tiny(), 5, 5);
  Batch b;
  b.add_pair({0, 9, 1}, {3});
  CHECK_THROWS_AS(net.forward(b), Error);
  CHECK_THROWS_AS(b.add_target(0, {0, 1}, {1}), Error);
}
