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

#include "entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "error.hpp"
#include "util.hpp"

namespace sadn {

Tensor Quantize(const Tensor& y, QuantMode mode, std::uint64_t seed) {
  if (mode == QuantMode::kRound) return Round(y);
  SplitMix64 rng(seed);
  std::vector<double> noise(y.numel());
  for (double& u : noise) u = rng.Unit() - 0.5;
  return Add(y, Tensor::FromData(y.shape(), std::move(noise)));
}

namespace {

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// d sigmoid / dz.
double SigmoidSlope(double z) {
  const double e = std::exp(-std::abs(z));
  return e / ((1.0 + e) * (1.0 + e));
}

// sigmoid(u) - sigmoid(l) for l < u, computed in whichever tail avoids
// cancellation.
double SigmoidDiff(double l, double u) {
  if (l + u > 0) return Sigmoid(-l) - Sigmoid(-u);
  return Sigmoid(u) - Sigmoid(l);
}

// Softmax over one channel's K logits.
void MixtureWeights(std::span<const double> logits, std::span<double> out) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp(logits[k] - mx);
    sum += out[k];
  }
  for (double& w : out) w /= sum;
}

}  // namespace

FactorizedEntropyModel::FactorizedEntropyModel(Tensor logits, Tensor means,
                                               Tensor log_scales)
    : logits_(std::move(logits)),
      means_(std::move(means)),
      log_scales_(std::move(log_scales)) {
  const Shape s = logits_.shape();
  Require(s.n >= 1 && s.c >= 1 && s.h == 1 && s.w == 1,
          "entropy model parameters must be (M, K, 1, 1)");
  Require(means_.shape() == s && log_scales_.shape() == s,
          "entropy model parameter shapes differ");
}

FactorizedEntropyModel FactorizedEntropyModel::Init(int channels,
                                                    int components) {
  Require(channels >= 1 && components >= 1, "invalid entropy model size");
  const Shape s{channels, components, 1, 1};
  std::vector<double> means(s.numel());
  for (int m = 0; m < channels; ++m)
    for (int k = 0; k < components; ++k)
      means[m * components + k] =
          components == 1 ? 0.0 : -1.0 + 2.0 * k / (components - 1);
  return FactorizedEntropyModel(Tensor::Zeros(s, true),
                                Tensor::FromData(s, std::move(means), true),
                                Tensor::Zeros(s, true));
}

double FactorizedEntropyModel::Cdf(int channel, double x) const {
  const int kc = components();
  std::vector<double> w(kc);
  MixtureWeights(logits_.data().subspan(channel * kc, kc), w);
  double cdf = 0.0;
  for (int k = 0; k < kc; ++k) {
    const double mu = means_.data()[channel * kc + k];
    const double s = std::exp(log_scales_.data()[channel * kc + k]);
    cdf += w[k] * Sigmoid((x - mu) / s);
  }
  return cdf;
}

double FactorizedEntropyModel::Pmf(int channel, double k_sym) const {
  const int kc = components();
  std::vector<double> w(kc);
  MixtureWeights(logits_.data().subspan(channel * kc, kc), w);
  double p = 0.0;
  for (int k = 0; k < kc; ++k) {
    const double mu = means_.data()[channel * kc + k];
    const double s = std::exp(log_scales_.data()[channel * kc + k]);
    p += w[k] * SigmoidDiff((k_sym - 0.5 - mu) / s, (k_sym + 0.5 - mu) / s);
  }
  return p;
}

Tensor LatentBits(const Tensor& y_hat, const FactorizedEntropyModel& model) {
  const Shape ys = y_hat.shape();
  Require(ys.c == model.channels(),
          "latent has " + std::to_string(ys.c) + " channels, entropy model " +
              std::to_string(model.channels()));
  const int kc = model.components();
  const std::size_t plane = ys.plane();
  const auto yd = y_hat.data();
  for (double v : yd) {
    if (!std::isfinite(v)) Fail(ErrorCode::kNumeric, "non-finite latent");
  }
  std::vector<double> bits(ys.numel());
  for (int n = 0; n < ys.n; ++n) {
    for (int c = 0; c < ys.c; ++c) {
      for (std::size_t i = 0; i < plane; ++i) {
        const std::size_t idx = (static_cast<std::size_t>(n) * ys.c + c) * plane + i;
        bits[idx] = -std::log2(std::max(model.Pmf(c, yd[idx]), kLikelihoodFloor));
      }
    }
  }
  Tensor logits = model.logits();
  Tensor means = model.means();
  Tensor log_scales = model.log_scales();
  Tensor y_in = y_hat;
  return Tensor::MakeOp(
      ys, std::move(bits), {y_in, logits, means, log_scales},
      [y_hat = y_in, logits, means, log_scales, ys, kc, plane](
          std::span<const double> g) mutable {
        const auto yd = y_hat.data();
        std::vector<double> w(kc), q(kc), dq_dy(kc), dq_dlogs(kc);
        std::span<double> gy, gl, gm, gs;
        if (y_hat.requires_grad()) gy = y_hat.mutable_grad();
        if (logits.requires_grad()) gl = logits.mutable_grad();
        if (means.requires_grad()) gm = means.mutable_grad();
        if (log_scales.requires_grad()) gs = log_scales.mutable_grad();
        for (int n = 0; n < ys.n; ++n) {
          for (int c = 0; c < ys.c; ++c) {
            MixtureWeights(logits.data().subspan(c * kc, kc), w);
            for (std::size_t i = 0; i < plane; ++i) {
              const std::size_t idx = (static_cast<std::size_t>(n) * ys.c + c) * plane + i;
              const double y = yd[idx];
              double p = 0.0;
              for (int k = 0; k < kc; ++k) {
                const double mu = means.data()[c * kc + k];
                const double s = std::exp(log_scales.data()[c * kc + k]);
                const double lo = (y - 0.5 - mu) / s;
                const double hi = (y + 0.5 - mu) / s;
                q[k] = SigmoidDiff(lo, hi);
                const double dlo = SigmoidSlope(lo);
                const double dhi = SigmoidSlope(hi);
                dq_dy[k] = (dhi - dlo) / s;
                dq_dlogs[k] = -(dhi * hi - dlo * lo);
                p += w[k] * q[k];
              }
              if (p < kLikelihoodFloor) continue;  // clamped: flat
              // d(-log2 p)/dp
              const double gp = -g[idx] / (p * std::numbers::ln2);
              for (int k = 0; k < kc; ++k) {
                if (!gy.empty()) gy[idx] += gp * w[k] * dq_dy[k];
                if (!gm.empty()) gm[c * kc + k] -= gp * w[k] * dq_dy[k];
                if (!gs.empty()) gs[c * kc + k] += gp * w[k] * dq_dlogs[k];
                if (!gl.empty()) gl[c * kc + k] += gp * w[k] * (q[k] - p);
              }
            }
          }
        }
      });
}

std::vector<double> LatentLikelihood(const Tensor& y_hat,
                                     const FactorizedEntropyModel& model) {
  const Shape ys = y_hat.shape();
  Require(ys.c == model.channels(), "latent/entropy model channel mismatch");
  const std::size_t plane = ys.plane();
  std::vector<double> p(ys.numel());
  for (std::size_t idx = 0; idx < p.size(); ++idx) {
    const double y = y_hat.data()[idx];
    if (!std::isfinite(y)) Fail(ErrorCode::kNumeric, "non-finite latent");
    const int c = static_cast<int>((idx / plane) % ys.c);
    p[idx] = std::max(model.Pmf(c, y), kLikelihoodFloor);
  }
  return p;
}

double EstimateRateBpp(std::span<const double> probs, int height, int width) {
  Require(height > 0 && width > 0, "rate needs positive image dimensions");
  double bits = 0.0;
  for (double p : probs) {
    Require(p > 0.0 && p <= 1.0, "probability outside (0, 1]");
    bits -= std::log2(p);
  }
  return bits / (static_cast<double>(height) * width);
}

CdfTable MakeCdfTable(std::span<const double> pmf, int min_symbol,
                      int precision) {
  Require(precision >= 9 && precision <= 16, "CDF precision must be in [9, 16]");
  const std::uint32_t total = 1u << precision;
  const std::size_t n = pmf.size();
  Require(n >= 1, "empty symbol range");
  if (n > total) {
    Fail(ErrorCode::kInvalidArgument,
         "symbol range of " + std::to_string(n) + " exceeds 2^" +
             std::to_string(precision) + " frequency slots");
  }
  double sum = 0.0;
  for (double p : pmf) sum += std::max(p, 0.0);
  const double spare = static_cast<double>(total - n);
  std::vector<std::uint32_t> freq(n);
  std::vector<double> frac(n);
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double share =
        sum > 0.0 ? std::max(pmf[i], 0.0) / sum * spare : spare / n;
    const double whole = std::floor(share);
    freq[i] = 1 + static_cast<std::uint32_t>(whole);
    frac[i] = share - whole;
    assigned += freq[i];
  }
  // Hand out the remainder by largest fractional part; ties by index.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t i = 0; assigned < total; i = (i + 1) % n, ++assigned) {
    ++freq[order[i]];
  }
  CdfTable t;
  t.min_symbol = min_symbol;
  t.max_symbol = min_symbol + static_cast<int>(n) - 1;
  t.precision = precision;
  t.cdf.resize(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) t.cdf[i + 1] = t.cdf[i] + freq[i];
  return t;
}

std::vector<CdfTable> BuildCdfTables(
    const FactorizedEntropyModel& model, int precision,
    std::span<const std::pair<int, int>> ranges) {
  Require(static_cast<int>(ranges.size()) == model.channels(),
          "need one symbol range per latent channel");
  std::vector<CdfTable> tables;
  tables.reserve(ranges.size());
  for (std::size_t c = 0; c < ranges.size(); ++c) {
    const auto [lo, hi] = ranges[c];
    Require(lo <= hi, "empty symbol range");
    std::vector<double> pmf;
    pmf.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (int k = lo; k <= hi; ++k) pmf.push_back(model.Pmf(static_cast<int>(c), k));
    tables.push_back(MakeCdfTable(pmf, lo, precision));
  }
  return tables;
}

}  // namespace sadn
