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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "entropy.hpp"
#include "error.hpp"
#include "oracles.hpp"
#include "range_coder.hpp"

using namespace sadn;

namespace {

// Four components with tiny scales centred on 0..3 and equal weights: each
// integer bin 0..3 holds one component's entire mass.
FactorizedEntropyModel UniformOverFour() {
  const Shape s{1, 4, 1, 1};
  return FactorizedEntropyModel(Tensor::Zeros(s),
                                Tensor::FromData(s, {0, 1, 2, 3}),
                                Tensor::Full(s, std::log(1e-3)));
}

FactorizedEntropyModel RandomModel(int channels, int k, std::mt19937_64& rng,
                                   bool requires_grad) {
  const Shape s{channels, k, 1, 1};
  return FactorizedEntropyModel(
      oracle::RandomTensor(s, rng, -1, 1, requires_grad),
      oracle::RandomTensor(s, rng, -2, 2, requires_grad),
      oracle::RandomTensor(s, rng, -0.5, 1.0, requires_grad));
}

CdfTable UniformTable(int n, int precision) {
  return MakeCdfTable(std::vector<double>(n, 1.0 / n), 0, precision);
}

}  // namespace

TEST_CASE("quantize: rounding rule, idempotence, noise bound") {
  const Tensor y = Tensor::FromData({1, 1, 1, 6}, {2.0, -1.5, 1.5, 0.49, -0.5, 7.0});
  const Tensor r = Quantize(y, QuantMode::kRound);
  const double expect[] = {2, -2, 2, 0, -1, 7};
  for (int i = 0; i < 6; ++i) CHECK(r.data()[i] == expect[i]);
  const Tensor rr = Quantize(r, QuantMode::kRound);
  for (int i = 0; i < 6; ++i) CHECK(rr.data()[i] == r.data()[i]);

  std::mt19937_64 rng(1);
  const Tensor big = oracle::RandomTensor({2, 3, 8, 8}, rng, -5, 5);
  const Tensor n1 = Quantize(big, QuantMode::kNoise, 99);
  const Tensor n2 = Quantize(big, QuantMode::kNoise, 99);
  const Tensor n3 = Quantize(big, QuantMode::kNoise, 100);
  bool any_diff = false;
  for (std::size_t i = 0; i < big.numel(); ++i) {
    const double d = n1.data()[i] - big.data()[i];
    CHECK(d >= -0.5);
    CHECK(d < 0.5);
    CHECK(n1.data()[i] == n2.data()[i]);
    any_diff |= n1.data()[i] != n3.data()[i];
  }
  CHECK(any_diff);
}

TEST_CASE("entropy model: CDF is a monotone map onto (0, 1)") {
  std::mt19937_64 rng(2);
  const auto m = RandomModel(3, 3, rng, false);
  for (int c = 0; c < 3; ++c) {
    double prev = 0.0;
    for (double x = -40; x <= 40; x += 0.25) {
      const double v = m.Cdf(c, x);
      CHECK(v >= prev);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      prev = v;
    }
    CHECK(m.Cdf(c, -200) < 1e-12);
    CHECK(m.Cdf(c, 200) > 1 - 1e-12);
    for (int k = -20; k <= 20; ++k) CHECK(m.Pmf(c, k) > 0.0);
  }
}

TEST_CASE("latent_likelihood: uniform over four bins gives 0.25") {
  const auto m = UniformOverFour();
  const Tensor y = Tensor::FromData({1, 1, 1, 4}, {0, 1, 2, 3});
  for (double p : LatentLikelihood(y, m)) CHECK(p == doctest::Approx(0.25).epsilon(1e-12));
  // Far outside the support the floor applies.
  const Tensor far = Tensor::FromData({1, 1, 1, 1}, {50});
  CHECK(LatentLikelihood(far, m)[0] == kLikelihoodFloor);
  const Tensor bad = Tensor::FromData({1, 1, 1, 1}, {std::nan("")});
  CHECK_THROWS_AS(LatentLikelihood(bad, m), Error);
}

TEST_CASE("latent_likelihood: probabilities telescope to at most one") {
  std::mt19937_64 rng(3);
  const auto m = RandomModel(2, 3, rng, false);
  for (int c = 0; c < 2; ++c) {
    double total = 0;
    for (int k = -60; k <= 60; ++k) total += m.Pmf(c, k);
    CHECK(total <= 1.0 + 1e-12);
    CHECK(total == doctest::Approx(m.Cdf(c, 60.5) - m.Cdf(c, -60.5)).epsilon(1e-10));
  }
}

TEST_CASE("latent bits: gradient check through -log2 p") {
  std::mt19937_64 rng(4);
  const auto m = RandomModel(2, 3, rng, true);
  Tensor y = oracle::RandomTensor({2, 2, 3, 3}, rng, -3, 3, true);
  std::vector<Tensor> params = {y, m.logits(), m.means(), m.log_scales()};
  const double err = GradCheck([&] { return Sum(LatentBits(y, m)); }, params,
                               1e-5, 1000, 5);
  CHECK(err < 1e-6);
  // Values agree with the likelihoods.
  const Tensor bits = LatentBits(y, m);
  const auto p = LatentLikelihood(y, m);
  for (std::size_t i = 0; i < p.size(); ++i)
    CHECK(bits.data()[i] == doctest::Approx(-std::log2(p[i])).epsilon(1e-12));
}

TEST_CASE("estimate_rate_bpp") {
  const std::vector<double> quarter(16, 0.25);
  CHECK(EstimateRateBpp(quarter, 8, 8) == doctest::Approx(0.5));
  const std::vector<double> ones(10, 1.0);
  CHECK(EstimateRateBpp(ones, 4, 4) == 0.0);
  const std::vector<double> zero = {0.5, 0.0};
  CHECK_THROWS_AS(EstimateRateBpp(zero, 4, 4), Error);
}

TEST_CASE("cdf tables: uniform, floor rule, precision bounds, determinism") {
  const CdfTable u = UniformTable(4, 12);
  for (int s = 0; s < 4; ++s) CHECK(u.Frequency(s) == 1024);
  const std::vector<double> skewed = {1.0, 1e-12, 0.0, 1e-9};
  const CdfTable t = MakeCdfTable(skewed, -2, 12);
  CHECK(t.min_symbol == -2);
  CHECK(t.max_symbol == 1);
  CHECK(t.cdf.back() == 4096u);
  for (int s = -2; s <= 1; ++s) CHECK(t.Frequency(s) >= 1);
  for (std::size_t i = 1; i < t.cdf.size(); ++i) CHECK(t.cdf[i] > t.cdf[i - 1]);
  CHECK_THROWS_AS(MakeCdfTable(skewed, 0, 8), Error);
  CHECK_THROWS_AS(MakeCdfTable(skewed, 0, 17), Error);
  CHECK_THROWS_AS(MakeCdfTable(std::vector<double>(600, 1.0), 0, 9), Error);

  std::mt19937_64 rng(5);
  const auto m = RandomModel(3, 3, rng, false);
  const std::vector<std::pair<int, int>> ranges = {{-5, 5}, {0, 0}, {-30, 2}};
  const auto a = BuildCdfTables(m, 14, ranges);
  const auto b = BuildCdfTables(m, 14, ranges);
  REQUIRE(a.size() == 3);
  for (int c = 0; c < 3; ++c) CHECK(a[c].cdf == b[c].cdf);
  CHECK(a[1].alphabet_size() == 1);
  CHECK(a[1].Frequency(0) == (1u << 14));
}

TEST_CASE("range coder: 1000 uniform symbols over 4 take 250 to 260 bytes") {
  const CdfTable u = UniformTable(4, 12);
  std::mt19937_64 rng(6);
  std::vector<int> s(1000);
  for (int& v : s) v = static_cast<int>(rng() % 4);
  const auto bytes = RangeEncode(s, u);
  CHECK(bytes.size() >= 250);
  CHECK(bytes.size() <= 260);
  CHECK(RangeDecode(bytes, u, s.size()) == s);
}

TEST_CASE("range coder: single-symbol alphabet costs only the flush") {
  const CdfTable one = MakeCdfTable(std::vector<double>{1.0}, 3, 12);
  const std::vector<int> s(5000, 3);
  const auto bytes = RangeEncode(s, one);
  CHECK(bytes.size() <= 6);
  CHECK(RangeDecode(bytes, one, s.size()) == s);
}

TEST_CASE("range coder: empty sequence") {
  const CdfTable u = UniformTable(4, 12);
  const auto bytes = RangeEncode(std::vector<int>{}, u);
  CHECK(RangeDecode(bytes, u, 0).empty());
  CHECK(RangeDecode(std::vector<std::uint8_t>{}, u, 0).empty());
}

TEST_CASE("range coder: random round trips with mixed tables") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10000; ++trial) {
    const int precision = 9 + static_cast<int>(rng() % 8);
    const int ntables = 1 + static_cast<int>(rng() % 3);
    std::vector<CdfTable> tables;
    for (int t = 0; t < ntables; ++t) {
      const int n = 1 + static_cast<int>(rng() % 20);
      std::vector<double> pmf(n);
      std::uniform_real_distribution<double> d(0, 1);
      for (double& p : pmf) p = std::pow(d(rng), 4.0);
      tables.push_back(MakeCdfTable(pmf, static_cast<int>(rng() % 11) - 5, precision));
    }
    const int len = static_cast<int>(rng() % 64);
    std::vector<int> index(len), symbols(len);
    for (int i = 0; i < len; ++i) {
      index[i] = static_cast<int>(rng() % ntables);
      const CdfTable& t = tables[index[i]];
      symbols[i] = t.min_symbol + static_cast<int>(rng() % t.alphabet_size());
    }
    const auto bytes = RangeEncode(symbols, index, tables);
    const auto back = RangeDecode(bytes, index, tables);
    CHECK(back == symbols);
  }
}

TEST_CASE("range coder: payload stays within the ideal bound") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> pmf(16);
    std::uniform_real_distribution<double> d(0, 1);
    for (double& p : pmf) p = std::pow(d(rng), 3.0) + 1e-4;
    const CdfTable t = MakeCdfTable(pmf, 0, 12);
    std::discrete_distribution<int> draw(pmf.begin(), pmf.end());
    std::vector<int> s(2000 + rng() % 3000);
    for (int& v : s) v = draw(rng);
    const std::vector<int> index(s.size(), 0);
    const double ideal = IdealCodeLengthBits(s, index, std::span(&t, 1));
    const double actual = 8.0 * static_cast<double>(RangeEncode(s, t).size());
    CHECK(actual >= ideal);
    CHECK(actual <= ideal * 1.02 + 512);
  }
}

TEST_CASE("range coder: errors") {
  const CdfTable u = UniformTable(4, 12);
  CHECK_THROWS_AS(RangeEncode(std::vector<int>{0, 4}, u), Error);
  std::vector<int> s(300);
  for (int i = 0; i < 300; ++i) s[i] = i % 4;
  auto bytes = RangeEncode(s, u);
  auto truncated = bytes;
  truncated.resize(bytes.size() / 2);
  try {
    RangeDecode(truncated, u, s.size());
    FAIL("truncated stream decoded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kFormat);
  }
  auto extended = bytes;
  extended.push_back(0);
  CHECK_THROWS_AS(RangeDecode(extended, u, s.size()), Error);
  // Asking for fewer symbols than were coded leaves bytes unconsumed.
  CHECK_THROWS_AS(RangeDecode(bytes, u, 10), Error);
}
