// Copyright 2026 The SADN Light Field Codec Authors. All Rights Reserved.
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

#include "optimizer.hpp"

#include <cmath>

namespace sadn {

void Adam::Step(ParamMap& params, AdamState& state) const {
  ++state.t;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(state.t));
  for (auto& [name, p] : params) {
    auto& m = state.m[name];
    auto& v = state.v[name];
    m.resize(p.numel(), 0.0);
    v.resize(p.numel(), 0.0);
    if (!p.has_grad()) {
      p.mutable_grad();
    }
    const double lr =
        name.starts_with("entropy.") ? lr_ * entropy_scale_ : lr_;
    const auto g = p.grad();
    auto x = p.mutable_data();
    for (std::size_t i = 0; i < x.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      x[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  }
}

}  // namespace sadn
