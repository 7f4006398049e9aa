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

#include "error.hpp"
#include "oracles.hpp"
#include "tensor.hpp"

using namespace sadn;
using oracle::RandomTensor;

namespace {

// Keeps values away from the kinks of piecewise ops so that central
// differences do not straddle them.
Tensor AwayFromZero(Shape s, std::mt19937_64& rng, double margin) {
  Tensor t = RandomTensor(s, rng);
  for (double& v : t.mutable_data()) {
    if (std::abs(v) < margin) v = v < 0 ? v - margin : v + margin;
  }
  return t;
}

double SumSquaresHalf(const Tensor& t) {
  double acc = 0;
  for (double v : t.data()) acc += v * v;
  return acc / 2;
}

}  // namespace

TEST_CASE("conv2d: 1x1 identity kernel is the identity") {
  std::mt19937_64 rng(1);
  const Tensor x = RandomTensor({2, 3, 5, 4}, rng);
  std::vector<double> w(9, 0.0);
  for (int i = 0; i < 3; ++i) w[i * 3 + i] = 1.0;
  const Tensor out = Conv2d(x, Tensor::FromData({3, 3, 1, 1}, w), Tensor(),
                            ConvSpec::Valid(3, 3, 1));
  CHECK(out.shape() == x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) CHECK(out.data()[i] == x.data()[i]);
}

TEST_CASE("conv2d: all-ones 3x3 over 5x5 ones gives 9s") {
  const Tensor x = Tensor::Full({1, 1, 5, 5}, 1.0);
  const Tensor w = Tensor::Full({1, 1, 3, 3}, 1.0);
  const Tensor out = Conv2d(x, w, Tensor(), ConvSpec::Valid(1, 1, 3));
  CHECK(out.shape() == Shape{1, 1, 3, 3});
  for (double v : out.data()) CHECK(v == 9.0);
}

TEST_CASE("conv2d: dilation 2 over 5x5 sums corner and center taps") {
  std::mt19937_64 rng(2);
  const Tensor x = RandomTensor({1, 1, 5, 5}, rng);
  const Tensor w = Tensor::Full({1, 1, 3, 3}, 1.0);
  const Tensor out = Conv2d(x, w, Tensor(), ConvSpec::Valid(1, 1, 3, 1, 2));
  REQUIRE(out.shape() == Shape{1, 1, 1, 1});
  double expect = 0;
  for (int r : {0, 2, 4})
    for (int c : {0, 2, 4}) expect += x.at(0, 0, r, c);
  CHECK(out.item() == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("conv2d: matches the nested-loop oracle on random specs") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> ch(1, 4), k(1, 3), st(1, 3), dil(1, 3),
      sz(1, 8);
  int checked = 0;
  while (checked < 200) {
    ConvSpec sp;
    sp.in_channels = ch(rng);
    sp.out_channels = ch(rng);
    sp.kernel_h = k(rng);
    sp.kernel_w = k(rng);
    sp.stride_h = st(rng);
    sp.stride_w = st(rng);
    sp.dilation_h = dil(rng);
    sp.dilation_w = dil(rng);
    sp.pad_h = std::uniform_int_distribution<int>(0, sp.kernel_h - 1)(rng);
    sp.pad_w = std::uniform_int_distribution<int>(0, sp.kernel_w - 1)(rng);
    const Shape xs{std::uniform_int_distribution<int>(1, 2)(rng), sp.in_channels,
                   sz(rng), sz(rng)};
    if (xs.h + 2 * sp.pad_h < sp.effective_kernel_h() ||
        xs.w + 2 * sp.pad_w < sp.effective_kernel_w()) {
      continue;
    }
    const Tensor x = RandomTensor(xs, rng);
    const Tensor w = RandomTensor(sp.weight_shape(), rng);
    const Tensor b = RandomTensor(sp.bias_shape(), rng);
    const Tensor out = Conv2d(x, w, b, sp);
    int oh = 0, ow = 0;
    const auto expect = oracle::NestedConv(x, w, b, sp, &oh, &ow);
    REQUIRE(out.shape() == Shape{xs.n, sp.out_channels, oh, ow});
    double worst = 0;
    for (std::size_t i = 0; i < expect.size(); ++i) {
      worst = std::max(worst, std::abs(out.data()[i] - expect[i]));
    }
    CHECK(worst < 1e-12);
    ++checked;
  }
}

TEST_CASE("conv2d_transposed: k=2 s=2 on a single 1 reproduces the kernel") {
  const Tensor x = Tensor::Full({1, 1, 1, 1}, 1.0);
  const Tensor w = Tensor::FromData({1, 1, 2, 2}, {1.5, -2.0, 3.25, 4.0});
  const ConvSpec sp = ConvSpec::Strided(1, 1, 2, 2, 0).AsTransposed();
  const Tensor out = Conv2dTransposed(x, w, Tensor(), sp);
  REQUIRE(out.shape() == Shape{1, 1, 2, 2});
  CHECK(out.at(0, 0, 0, 0) == 1.5);
  CHECK(out.at(0, 0, 0, 1) == -2.0);
  CHECK(out.at(0, 0, 1, 0) == 3.25);
  CHECK(out.at(0, 0, 1, 1) == 4.0);
}

TEST_CASE("conv2d_transposed: stride 1 identity kernel is the identity") {
  std::mt19937_64 rng(4);
  const Tensor x = RandomTensor({1, 2, 3, 3}, rng);
  const Tensor w = Tensor::FromData({2, 2, 1, 1}, {1, 0, 0, 1});
  const Tensor out =
      Conv2dTransposed(x, w, Tensor(), ConvSpec::Valid(2, 2, 1).AsTransposed());
  for (std::size_t i = 0; i < x.numel(); ++i) CHECK(out.data()[i] == x.data()[i]);
}

TEST_CASE("conv2d_transposed: adjoint identity <Kx, y> = <x, K^T y>") {
  std::mt19937_64 rng(5);
  const std::vector<ConvSpec> specs = {
      ConvSpec::Same(3, 4, 3, 1),      ConvSpec::Same(3, 4, 3, 2),
      ConvSpec::Same(2, 2, 3, 4),      ConvSpec::Valid(3, 5, 4, 4),
      ConvSpec::Valid(2, 3, 2, 2),     ConvSpec::Strided(3, 2, 4, 2, 1),
      ConvSpec::Valid(1, 1, 3, 1, 2),  ConvSpec::Strided(2, 3, 3, 2, 1)};
  for (const ConvSpec& sp : specs) {
    const ConvSpec tsp = sp.AsTransposed();
    // Largest extent <= 8 that the transposed geometry maps back onto
    // exactly (no output padding ambiguity).
    int side = 8;
    while (tsp.OutputH(sp.OutputH(side)) != side) --side;
    for (int trial = 0; trial < 5; ++trial) {
      const Shape xs{2, sp.in_channels, side, side};
      const Tensor x = RandomTensor(xs, rng);
      const Tensor w = RandomTensor(sp.weight_shape(), rng);
      const Tensor kx = Conv2d(x, w, Tensor(), sp);
      const Tensor y = RandomTensor(kx.shape(), rng);
      // Forward weights (out, in, kh, kw) are the transposed op's
      // (in, out, kh, kw).
      const Tensor kty = Conv2dTransposed(y, w, Tensor(), tsp);
      REQUIRE(kty.shape() == xs);
      const double lhs = oracle::Dot(kx.data(), y.data());
      const double rhs = oracle::Dot(x.data(), kty.data());
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
    }
  }
}

TEST_CASE("upsample_nearest: definition, identity, and pooling inverse") {
  const Tensor x = Tensor::FromData({1, 1, 2, 2}, {1, 2, 3, 4});
  const Tensor up = UpsampleNearest(x, 2);
  const std::vector<double> expect = {1, 1, 2, 2, 1, 1, 2, 2,
                                      3, 3, 4, 4, 3, 3, 4, 4};
  REQUIRE(up.shape() == Shape{1, 1, 4, 4});
  for (std::size_t i = 0; i < expect.size(); ++i) CHECK(up.data()[i] == expect[i]);
  CHECK(UpsampleNearest(x, 1).data()[3] == 4);
  std::mt19937_64 rng(6);
  for (int a : {1, 2, 3, 5}) {
    const Tensor r = RandomTensor({2, 3, 3, 4}, rng);
    const Tensor back = AvgPool(UpsampleNearest(r, a), a);
    for (std::size_t i = 0; i < r.numel(); ++i)
      CHECK(back.data()[i] == doctest::Approx(r.data()[i]).epsilon(1e-14));
  }
}

TEST_CASE("concat and slice channels are inverse") {
  std::mt19937_64 rng(7);
  const Tensor a = RandomTensor({2, 2, 3, 3}, rng);
  const Tensor b = RandomTensor({2, 3, 3, 3}, rng);
  const Tensor parts[] = {a, b};
  const Tensor c = ConcatChannels(parts);
  CHECK(c.shape() == Shape{2, 5, 3, 3});
  CHECK(c.at(1, 1, 2, 0) == a.at(1, 1, 2, 0));
  CHECK(c.at(1, 4, 2, 0) == b.at(1, 2, 2, 0));
  const Tensor sa = SliceChannels(c, 0, 2);
  const Tensor sb = SliceChannels(c, 2, 3);
  for (std::size_t i = 0; i < a.numel(); ++i) CHECK(sa.data()[i] == a.data()[i]);
  for (std::size_t i = 0; i < b.numel(); ++i) CHECK(sb.data()[i] == b.data()[i]);
  const Tensor one[] = {a};
  const Tensor same = ConcatChannels(one);
  for (std::size_t i = 0; i < a.numel(); ++i) CHECK(same.data()[i] == a.data()[i]);
  const Tensor bad = Tensor::Zeros({2, 1, 4, 3});
  const Tensor mismatched[] = {a, bad};
  CHECK_THROWS_AS(ConcatChannels(mismatched), Error);
}

TEST_CASE("leaky_relu values") {
  const Tensor x = Tensor::FromData({1, 1, 1, 4}, {-2, -1, 0, 3});
  const Tensor y = LeakyRelu(x, 0.2);
  CHECK(y.data()[0] == doctest::Approx(-0.4));
  CHECK(y.data()[3] == 3);
  CHECK(LeakyRelu(x, 0.0).data()[1] == 0.0);
  CHECK_THROWS_AS(LeakyRelu(x, 1.0), Error);
}

TEST_CASE("round is half away from zero with zero gradient") {
  const Tensor x = Tensor::FromData({1, 1, 1, 5}, {2.0, -1.5, 1.5, -0.4, 0.5}, true);
  const Tensor r = Round(x);
  CHECK(r.data()[0] == 2.0);
  CHECK(r.data()[1] == -2.0);
  CHECK(r.data()[2] == 2.0);
  CHECK(r.data()[3] == 0.0);
  CHECK(r.data()[4] == 1.0);
  Backward(Sum(r));
  for (double g : x.grad()) CHECK(g == 0.0);
}

TEST_CASE("backward: sum gives ones; leaves accumulate; errors") {
  const Tensor x = Tensor::FromData({1, 1, 2, 2}, {1, 2, 3, 4}, true);
  Backward(Sum(x));
  for (double g : x.grad()) CHECK(g == 1.0);
  Backward(Sum(x));
  for (double g : x.grad()) CHECK(g == 2.0);
  x.ZeroGrad();
  Backward(Sum(Scale(x, 3.0)));
  for (double g : x.grad()) CHECK(g == 3.0);
  CHECK_THROWS_AS(Backward(x), Error);
  CHECK_THROWS_AS(Backward(Sum(x).Detach()), Error);
}

TEST_CASE("backward of sum(conv(x, w)^2)/2 matches central differences") {
  std::mt19937_64 rng(8);
  const ConvSpec sp = ConvSpec::Same(2, 3, 3, 2);
  Tensor x = RandomTensor({1, 2, 6, 6}, rng, -1, 1, true);
  Tensor w = RandomTensor(sp.weight_shape(), rng, -1, 1, true);
  const Tensor b = RandomTensor(sp.bias_shape(), rng, -1, 1, true);
  auto loss = [&] { return Scale(Sum(Square(Conv2d(x, w, b, sp))), 0.5); };
  Backward(loss());
  auto f = [&] { return SumSquaresHalf(Conv2d(x, w, b, sp)); };
  for (Tensor* p : {&x, &w}) {
    const auto numeric = oracle::NumericGrad(f, *p, 1e-5);
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      const double a = p->grad()[i];
      const double rel = std::abs(a - numeric[i]) /
                         std::max({std::abs(a), std::abs(numeric[i]), 1e-12});
      CHECK(rel < 1e-6);
    }
  }
}

TEST_CASE("grad_check: every differentiable op below 1e-6") {
  std::mt19937_64 rng(9);
  const double eps = 1e-5;
  auto check = [&](const char* name, const std::function<Tensor()>& build,
                   std::vector<Tensor> params) {
    const double err = GradCheck(build, params, eps, 1000, 11);
    INFO(name);
    CHECK(err < 1e-6);
  };
  // A fixed random projection makes every output element matter.
  auto project = [&](const Tensor& t) {
    const Tensor r = RandomTensor(t.shape(), rng);
    return r;
  };

  {
    const ConvSpec sp = ConvSpec::Valid(2, 3, 2, 2);
    Tensor x = RandomTensor({2, 2, 6, 6}, rng, -1, 1, true);
    Tensor w = RandomTensor(sp.weight_shape(), rng, -1, 1, true);
    Tensor b = RandomTensor(sp.bias_shape(), rng, -1, 1, true);
    const Tensor r = project(Conv2d(x, w, b, sp));
    check("conv2d stride", [&] { return Sum(Mul(Conv2d(x, w, b, sp), r)); }, {x, w, b});
  }
  {
    const ConvSpec sp = ConvSpec::Same(2, 2, 3, 3);
    Tensor x = RandomTensor({1, 2, 9, 9}, rng, -1, 1, true);
    Tensor w = RandomTensor(sp.weight_shape(), rng, -1, 1, true);
    Tensor b = RandomTensor(sp.bias_shape(), rng, -1, 1, true);
    check("conv2d dilated", [&] { return Sum(Square(Conv2d(x, w, b, sp))); }, {x, w, b});
  }
  {
    const ConvSpec sp = ConvSpec::Strided(3, 2, 4, 2, 1).AsTransposed();
    Tensor x = RandomTensor({2, 2, 3, 3}, rng, -1, 1, true);
    Tensor w = RandomTensor(sp.weight_shape(), rng, -1, 1, true);
    Tensor b = RandomTensor(sp.bias_shape(), rng, -1, 1, true);
    check("conv2d transposed",
          [&] { return Sum(Square(Conv2dTransposed(x, w, b, sp))); }, {x, w, b});
  }
  {
    Tensor x = RandomTensor({1, 2, 2, 3}, rng, -1, 1, true);
    const Tensor r = project(UpsampleNearest(x, 3));
    check("upsample", [&] { return Sum(Mul(UpsampleNearest(x, 3), r)); }, {x});
  }
  {
    Tensor x = RandomTensor({1, 2, 4, 6}, rng, -1, 1, true);
    check("avgpool", [&] { return Sum(Square(AvgPool(x, 2))); }, {x});
  }
  {
    Tensor a = RandomTensor({1, 2, 3, 3}, rng, -1, 1, true);
    Tensor b = RandomTensor({1, 1, 3, 3}, rng, -1, 1, true);
    const Tensor parts[] = {a, b};
    const Tensor r = project(ConcatChannels(parts));
    check("concat", [&] {
      const Tensor p[] = {a, b};
      return Sum(Mul(ConcatChannels(p), r));
    }, {a, b});
    check("slice", [&] { return Sum(Square(SliceChannels(a, 1, 1))); }, {a});
  }
  {
    Tensor x = AwayFromZero({1, 2, 3, 3}, rng, 1e-3);
    x = Tensor::FromData(x.shape(), {x.data().begin(), x.data().end()}, true);
    const Tensor r = project(x);
    check("leaky_relu", [&] { return Sum(Mul(LeakyRelu(x, 0.2), r)); }, {x});
    Tensor c = Tensor::FromData(x.shape(), {x.data().begin(), x.data().end()}, true);
    for (double& v : c.mutable_data()) v *= 0.4;  // inside and outside (-0.25, 0.25)
    for (double& v : c.mutable_data())
      if (std::abs(std::abs(v) - 0.25) < 1e-3) v += 0.01;
    check("clamp", [&] { return Sum(Mul(Clamp(c, -0.25, 0.25), r)); }, {c});
  }
  {
    Tensor a = RandomTensor({1, 2, 3, 3}, rng, -1, 1, true);
    Tensor b = RandomTensor({1, 2, 3, 3}, rng, -1, 1, true);
    check("add", [&] { return Sum(Square(Add(a, b))); }, {a, b});
    check("sub", [&] { return Sum(Square(Sub(a, b))); }, {a, b});
    check("mul", [&] { return Sum(Mul(a, b)); }, {a, b});
    check("scale", [&] { return Sum(Square(Scale(a, -1.7))); }, {a});
    check("add_scalar", [&] { return Sum(Square(AddScalar(a, 0.3))); }, {a});
    check("mean", [&] { return Square(Mean(a)); }, {a});
  }
}

TEST_CASE("grad_check: linear function is exact; rounding is reported") {
  std::mt19937_64 rng(10);
  Tensor x = RandomTensor({1, 1, 3, 3}, rng, -1, 1, true);
  const Tensor r = RandomTensor(x.shape(), rng);
  const std::vector<Tensor> ps = {x};
  CHECK(GradCheck([&] { return Sum(Mul(x, r)); }, ps, 1e-5, 100) < 1e-9);
  // Rounding makes the true derivative a sum of deltas: a step of eps that
  // crosses a rounding boundary yields a huge numeric slope.
  Tensor y = Tensor::FromData({1, 1, 1, 1}, {0.5 - 1e-7}, true);
  const std::vector<Tensor> py = {y};
  CHECK(GradCheck([&] { return Sum(Round(y)); }, py, 1e-5, 10) > 0.5);
}

TEST_CASE("conv spec validation") {
  CHECK_THROWS_AS(ConvSpec::Same(1, 1, 2), Error);  // even effective kernel
  const Tensor x = Tensor::Zeros({1, 2, 4, 4});
  const ConvSpec sp = ConvSpec::Valid(3, 1, 3);
  CHECK_THROWS_AS(Conv2d(x, Tensor::Zeros(sp.weight_shape()), Tensor(), sp), Error);
  const ConvSpec big = ConvSpec::Valid(2, 1, 5);
  CHECK_THROWS_AS(Conv2d(x, Tensor::Zeros(big.weight_shape()), Tensor(), big), Error);
}
