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

#ifndef SADN_CORE_ENTROPY_HPP_
#define SADN_CORE_ENTROPY_HPP_

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "tensor.hpp"

namespace sadn {

enum class QuantMode { kNoise, kRound };

// Noise: y + u with u ~ U[-0.5, 0.5) drawn from `seed`; gradient passes
// straight through. Round: half away from zero, zero gradient.
Tensor Quantize(const Tensor& y, QuantMode mode, std::uint64_t seed = 0);

// Probabilities below this are clamped when estimating rate.
inline constexpr double kLikelihoodFloor = 1.0 / 65536.0;

// Per-channel mixture of K logistic distributions. The three parameter
// tensors have shape (M, K, 1, 1): mixture logits, means and log-scales.
class FactorizedEntropyModel {
 public:
  FactorizedEntropyModel(Tensor logits, Tensor means, Tensor log_scales);

  // Fresh parameters: uniform weights, means spread over [-1, 1], unit scale.
  static FactorizedEntropyModel Init(int channels, int components);

  int channels() const { return logits_.shape().n; }
  int components() const { return logits_.shape().c; }

  double Cdf(int channel, double x) const;
  // CDF(k + 0.5) - CDF(k - 0.5) evaluated without cancellation; unfloored.
  double Pmf(int channel, double k) const;

  const Tensor& logits() const { return logits_; }
  const Tensor& means() const { return means_; }
  const Tensor& log_scales() const { return log_scales_; }

 private:
  Tensor logits_;
  Tensor means_;
  Tensor log_scales_;
};

// Elementwise -log2(max(pmf(y_hat), floor)), differentiable with respect to
// y_hat and the model parameters. y_hat is (n, M, h, w).
Tensor LatentBits(const Tensor& y_hat, const FactorizedEntropyModel& model);

// Floored per-element probabilities, same order as y_hat's data.
std::vector<double> LatentLikelihood(const Tensor& y_hat,
                                     const FactorizedEntropyModel& model);

// Bits per lenslet pixel: sum(-log2 p) / (height * width).
double EstimateRateBpp(std::span<const double> probs, int height, int width);

// Integer CDF for one channel over symbols [min_symbol, max_symbol].
// cdf has (max - min + 2) entries, cdf[0] = 0, cdf.back() = 2^precision,
// strictly increasing.
struct CdfTable {
  int min_symbol = 0;
  int max_symbol = 0;
  int precision = 12;
  std::vector<std::uint32_t> cdf;

  int alphabet_size() const { return max_symbol - min_symbol + 1; }
  std::uint32_t Frequency(int symbol) const {
    const int k = symbol - min_symbol;
    return cdf[k + 1] - cdf[k];
  }
};

// Quantizes a probability vector to integer frequencies >= 1 summing to
// 2^precision.
CdfTable MakeCdfTable(std::span<const double> pmf, int min_symbol,
                      int precision);

// One table per channel. `ranges` holds the inclusive symbol interval of
// each channel.
std::vector<CdfTable> BuildCdfTables(
    const FactorizedEntropyModel& model, int precision,
    std::span<const std::pair<int, int>> ranges);

}  // namespace sadn

#endif  // SADN_CORE_ENTROPY_HPP_
