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

#ifndef SADN_CORE_OPTIMIZER_HPP_
#define SADN_CORE_OPTIMIZER_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sadn_net.hpp"

namespace sadn {

struct AdamState {
  std::int64_t t = 0;
  std::map<std::string, std::vector<double>> m;
  std::map<std::string, std::vector<double>> v;
  bool operator==(const AdamState&) const = default;
};

// Adaptive moment estimation with bias correction. Parameters whose name
// starts with "entropy." use learning_rate * entropy_lr_scale.
class Adam {
 public:
  explicit Adam(double learning_rate, double entropy_lr_scale = 1.0,
                double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8)
      : lr_(learning_rate),
        entropy_scale_(entropy_lr_scale),
        beta1_(beta1),
        beta2_(beta2),
        eps_(epsilon) {}

  // Applies one update from the parameters' current gradients. Parameters
  // without a gradient buffer are treated as having zero gradient.
  void Step(ParamMap& params, AdamState& state) const;

 private:
  double lr_, entropy_scale_, beta1_, beta2_, eps_;
};

}  // namespace sadn

#endif  // SADN_CORE_OPTIMIZER_HPP_
