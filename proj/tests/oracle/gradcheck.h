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

// Central finite differences over every parameter of a double-precision
// transformer, grouped by tensor.

#ifndef XLIT_TESTS_ORACLE_GRADCHECK_H_
#define XLIT_TESTS_ORACLE_GRADCHECK_H_

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>

#include "xlit/transformer.h"

namespace oracle {

// Random small batch of n pairs with ids drawn from the non-special range.
inline xlit::model::Batch random_batch(std::mt19937& rng, int n, std::size_t vin, std::size_t vout) {
  xlit::model::Batch b;
  for (int e = 0; e < n; ++e) {
    std::vector<int> src{xlit::model::kBosId};
    const int ls = 2 + rng() % 4;
    for (int i = 0; i < ls; ++i) src.push_back(3 + rng() % (vin - 3));
    src.push_back(xlit::model::kEosId);
    std::vector<int> tgt;
    const int lt = 1 + rng() % 4;
    for (int i = 0; i < lt; ++i) tgt.push_back(3 + rng() % (vout - 3));
    b.add_pair(src, tgt);
  }
  return b;
}

// Parameters drawn so that every path carries signal: gains around 1,
// non-zero biases.
inline void randomize(xlit::model::Transformer<double>& net, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (const auto& t : net.layout().tensors()) {
    const bool gain = t.name.size() > 2 && t.name.compare(t.name.size() - 2, 2, ".g") == 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      net.params()[t.offset + i] = gain ? 1.0 + u(rng) : u(rng);
    }
  }
}

struct GroupError {
  double max_rel = 0;
  double max_abs = 0;
};

// Relative error per element is |a - n| / max(|a|, |n|, floor). The floor
// matters for the attention key biases: softmax is shift invariant, so their
// true gradient is exactly zero and only finite-difference noise remains.
inline std::map<std::string, GroupError> gradcheck(xlit::model::Transformer<double>& net,
                                                   const xlit::model::Batch& batch,
                                                   double h = 1e-5, double floor = 1e-7) {
  std::vector<double> grads;
  net.loss_and_grads(batch, grads);
  std::map<std::string, GroupError> out;
  for (const auto& t : net.layout().tensors()) {
    GroupError ge;
    for (std::size_t i = 0; i < t.size(); ++i) {
      double& p = net.params()[t.offset + i];
      const double keep = p;
      p = keep + h;
      const double up = net.loss(batch);
      p = keep - h;
      const double down = net.loss(batch);
      p = keep;
      const double num = (up - down) / (2 * h);
      const double ana = grads[t.offset + i];
      const double diff = std::abs(num - ana);
      ge.max_abs = std::max(ge.max_abs, diff);
      ge.max_rel = std::max(ge.max_rel, diff / std::max({std::abs(num), std::abs(ana), floor}));
    }
    out[t.name] = ge;
  }
  return out;
}

}  // namespace oracle

#endif  // XLIT_TESTS_ORACLE_GRADCHECK_H_
