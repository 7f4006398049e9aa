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
#include <cstdio>
#include <filesystem>
#include <random>

#include "error.hpp"
#include "lightfield.hpp"
#include "metrics.hpp"
#include "oracles.hpp"

using namespace sadn;

namespace {

Image RandomImage(int h, int w, int c, std::mt19937_64& rng) {
  Image img(h, w, c);
  std::uniform_real_distribution<double> d(0, 1);
  for (double& v : img.data()) v = d(rng);
  return img;
}

// Straight-from-definition SSIM on one channel: explicit window, two-pass
// centred moments.
double SsimOracle(const Image& a, const Image& b) {
  const int win = 11;
  double g[11][11];
  double total = 0;
  for (int i = 0; i < win; ++i)
    for (int j = 0; j < win; ++j) {
      g[i][j] = std::exp(-((i - 5.0) * (i - 5.0) + (j - 5.0) * (j - 5.0)) / 4.5);
      total += g[i][j];
    }
  const double c1 = 1e-4, c2 = 9e-4;
  double acc = 0;
  int count = 0;
  for (int r = 0; r + win <= a.height(); ++r)
    for (int c = 0; c + win <= a.width(); ++c) {
      double mx = 0, my = 0;
      for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
          mx += g[i][j] / total * a.at(r + i, c + j, 0);
          my += g[i][j] / total * b.at(r + i, c + j, 0);
        }
      double vx = 0, vy = 0, cov = 0;
      for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
          const double dx = a.at(r + i, c + j, 0) - mx;
          const double dy = b.at(r + i, c + j, 0) - my;
          vx += g[i][j] / total * dx * dx;
          vy += g[i][j] / total * dy * dy;
          cov += g[i][j] / total * dx * dy;
        }
      acc += (2 * mx * my + c1) * (2 * cov + c2) /
             ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  return acc / count;
}

// Quality as a concave quadratic in log10(rate).
struct RdModel {
  double alpha, beta, gamma;
  double Psnr(double bpp) const {
    const double l = std::log10(bpp);
    return alpha + beta * l + gamma * l * l;
  }
};

RDCurve SampleCurve(const RdModel& m, double bpp0, double ratio, int n) {
  RDCurve c;
  double b = bpp0;
  for (int i = 0; i < n; ++i, b *= ratio)
    c.push_back({b, m.Psnr(b), 1.0 - 0.5 * std::exp(-4 * b)});
  return c;
}

RDCurve ScaleRate(RDCurve c, double factor) {
  for (RDPoint& p : c) p.bpp *= factor;
  return c;
}

}  // namespace

TEST_CASE("psnr: closed forms and cap") {
  std::mt19937_64 rng(1);
  const Image a = RandomImage(8, 8, 3, rng);
  CHECK(Psnr(a, a) == kPsnrCap);
  Image b = a;
  for (double& v : b.data()) v += 1.0 / 255.0;
  CHECK(Psnr(a, b) == doctest::Approx(20 * std::log10(255.0)).epsilon(1e-12));
  CHECK(Psnr(a, b) == doctest::Approx(48.1308).epsilon(1e-5));
  Image c = a;
  for (double& v : c.data()) v += 0.1;
  CHECK(Mse(a, c) == doctest::Approx(0.01));
  CHECK(Psnr(a, c) == doctest::Approx(20.0).epsilon(1e-12));
  const Image r = RandomImage(8, 8, 3, rng);
  CHECK(Psnr(a, r) == Psnr(r, a));
  CHECK(Psnr(a, c, 255.0) == doctest::Approx(20 * std::log10(255.0 / 0.1)));
  CHECK_THROWS_AS(Psnr(a, RandomImage(8, 7, 3, rng)), Error);
}

TEST_CASE("ssim: identity, inversion, direct oracle") {
  std::mt19937_64 rng(2);
  const Image a = RandomImage(20, 17, 1, rng);
  CHECK(Ssim(a, a) == doctest::Approx(1.0).epsilon(1e-14));
  Image inv = a;
  for (double& v : inv.data()) v = 1 - v;
  CHECK(Ssim(a, inv) < 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const Image x = RandomImage(14 + trial, 16, 1, rng);
    Image y = x;
    std::normal_distribution<double> n(0, 0.1 * (trial + 1));
    for (double& v : y.data()) v += n(rng);
    CHECK(std::abs(Ssim(x, y) - SsimOracle(x, y)) < 1e-9);
  }
  // RGB goes through BT.601 luma.
  const Image rgb = RandomImage(12, 12, 3, rng);
  const Image rgb2 = RandomImage(12, 12, 3, rng);
  CHECK(std::abs(Ssim(rgb, rgb2) - SsimOracle(Luma(rgb), Luma(rgb2))) < 1e-9);
  CHECK(Luma(rgb).at(3, 4, 0) ==
        doctest::Approx(0.299 * rgb.at(3, 4, 0) + 0.587 * rgb.at(3, 4, 1) +
                        0.114 * rgb.at(3, 4, 2)));
  CHECK_THROWS_AS(Ssim(RandomImage(10, 20, 1, rng), RandomImage(10, 20, 1, rng)),
                  Error);
}

TEST_CASE("sai-mean metrics agree with per-view evaluation") {
  std::mt19937_64 rng(3);
  const LensletImage a(RandomImage(24, 24, 3, rng), 2);
  const LensletImage b(RandomImage(24, 24, 3, rng), 2);
  const SAIStack sa = LiToSais(a), sb = LiToSais(b);
  double p = 0, s = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    p += Psnr(sa.views()[i], sb.views()[i]);
    s += Ssim(sa.views()[i], sb.views()[i]);
  }
  CHECK(PsnrSaiMean(a, b) == doctest::Approx(p / 4));
  CHECK(SsimSaiMean(a, b) == doctest::Approx(s / 4));
  CHECK(PsnrSaiMean(a, a) == kPsnrCap);
}

TEST_CASE("rd curves: validation and csv round trip") {
  const RDCurve c = {{0.1, 30, 0.8}, {0.2, 32, 0.85}, {0.4, 31.5, 0.9}, {0.8, 36, 0.95}};
  const auto warnings = ValidateRdCurve(c);
  CHECK(warnings.size() == 1);
  CHECK_THROWS_AS(ValidateRdCurve(RDCurve(c.begin(), c.begin() + 3)), Error);
  RDCurve bad = c;
  bad[2].bpp = 0.2;
  CHECK_THROWS_AS(ValidateRdCurve(bad), Error);
  bad = c;
  bad[0].bpp = 0;
  CHECK_THROWS_AS(ValidateRdCurve(bad), Error);
  bad = c;
  bad[1].ssim = 1.5;
  CHECK_THROWS_AS(ValidateRdCurve(bad), Error);

  const RDCurve back = ParseRdCurveCsv(FormatRdCurveCsv(c));
  REQUIRE(back.size() == c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(back[i].bpp == c[i].bpp);
    CHECK(back[i].psnr == c[i].psnr);
    CHECK(back[i].ssim == c[i].ssim);
  }
  CHECK(ParseRdCurveCsv("bpp,psnr,ssim\r\n0.5,30,0.9\r\n\n").size() == 1);
  CHECK_THROWS_AS(ParseRdCurveCsv("rate,psnr,ssim\n"), Error);
  CHECK_THROWS_AS(ParseRdCurveCsv("bpp,psnr,ssim\n0.5,30\n"), Error);
  CHECK_THROWS_AS(ParseRdCurveCsv("bpp,psnr,ssim\n0.5,x,0.9\n"), Error);

  const auto path = std::filesystem::temp_directory_path() / "sadn_rd_test.csv";
  WriteRdCurve(path.string(), c);
  CHECK(ReadRdCurve(path.string()).size() == 4);
  std::filesystem::remove(path);
}

TEST_CASE("cubic fit: exact recovery and degeneracy") {
  const std::vector<double> coef = {1.5, -2.0, 0.25, 0.125};
  std::vector<double> x = {-3, -1, 0.5, 2, 4, 7}, y;
  for (double v : x) y.push_back(EvalPoly(coef, v));
  const auto c = FitCubic(x, y);
  for (int k = 0; k < 4; ++k) CHECK(c[k] == doctest::Approx(coef[k]).epsilon(1e-9));
  CHECK(IntegratePoly({0, 0, 3}, 0, 2) == doctest::Approx(8.0));
  CHECK_THROWS_AS(FitCubic({1, 1, 1, 1}, {1, 2, 3, 4}), Error);
  CHECK_THROWS_AS(FitCubic({1, 2, 1, 2, 1}, {1, 2, 3, 4, 5}), Error);
  CHECK_THROWS_AS(FitCubic({1, 2, 3}, {1, 2, 3}), Error);
}

TEST_CASE("bd: identical curves, rate halving, constant quality shift") {
  const RdModel m{30, 12, -2};
  const RDCurve a = SampleCurve(m, 0.05, 1.8, 5);
  CHECK(std::abs(BdRate(a, a)) < 1e-9);
  CHECK(std::abs(BdPsnr(a, a)) < 1e-9);
  CHECK(std::abs(BdRate(a, a, QualityAxis::kSsim)) < 1e-9);

  CHECK(BdRate(a, ScaleRate(a, 0.5)) == doctest::Approx(-50.0).epsilon(1e-9));
  CHECK(BdRate(a, ScaleRate(a, 2.0)) == doctest::Approx(100.0).epsilon(1e-9));
  RDCurve up = a;
  for (RDPoint& p : up) p.psnr += 1.0;
  CHECK(BdPsnr(a, up) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(BdRate(a, up) < 0);

  for (double f : {0.3, 0.7, 1.4}) {
    const double r1 = BdRate(a, ScaleRate(a, f));
    const double r2 = BdRate(ScaleRate(a, f), a);
    CHECK((1 + r1 / 100) * (1 + r2 / 100) == doctest::Approx(1.0).epsilon(1e-9));
  }
  RDCurve far = a;
  for (RDPoint& p : far) p.psnr += 100;
  CHECK_THROWS_AS(BdRate(a, far), Error);
}

TEST_CASE("bd: agreement with fine-grid integration on random curve pairs") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const RdModel ma{28 + 6 * u(rng), 8 + 6 * u(rng), -3 * u(rng)};
    const RdModel mt{ma.alpha + 2 * u(rng) - 0.5, ma.beta * (0.8 + 0.4 * u(rng)),
                     ma.gamma * (0.5 + u(rng))};
    const RDCurve a = SampleCurve(ma, 0.02 + 0.05 * u(rng), 1.5 + u(rng),
                                  4 + static_cast<int>(rng() % 3));
    const RDCurve t = SampleCurve(mt, 0.02 + 0.05 * u(rng), 1.5 + u(rng),
                                  4 + static_cast<int>(rng() % 3));
    std::vector<double> qa, ra, qt, rt;
    for (const RDPoint& p : a) {
      qa.push_back(p.psnr);
      ra.push_back(std::log10(p.bpp));
    }
    for (const RDPoint& p : t) {
      qt.push_back(p.psnr);
      rt.push_back(std::log10(p.bpp));
    }
    const double want_rate =
        100 * (std::pow(10.0, oracle::GridAverageGap(qa, ra, qt, rt, 20000)) - 1);
    const double want_psnr = oracle::GridAverageGap(ra, qa, rt, qt, 20000);
    const double got_rate = BdRate(a, t);
    CHECK(std::abs(got_rate - want_rate) <= 1e-3 * std::max(1.0, std::abs(want_rate)));
    CHECK(std::abs(BdPsnr(a, t) - want_psnr) < 0.01);
  }
}

TEST_CASE("bd report formatting") {
  CHECK(FormatBdReportCsv(-12.5, 0.75, QualityAxis::kPsnr) ==
        "quality,bd_rate_percent,bd_quality\npsnr,-12.500000,0.750000\n");
  CHECK(FormatBdReportText(-12.5, 0.75, QualityAxis::kPsnr).find("-12.500 %") !=
        std::string::npos);
  CHECK(FormatBdReportText(3, 0.01, QualityAxis::kSsim).find("BD-SSIM") !=
        std::string::npos);
}

TEST_CASE("epi: slope equals the generator disparity") {
  for (int a : {3, 5, 7}) {
    for (int d : {0, 1, 2}) {
      for (const char* pattern : {"noise", "stripes", "rings"}) {
        char text[128];
        std::snprintf(text, sizeof text, "layer pattern=%s seed=%d disparity=%d mask=full\n",
                      pattern, 10 + d + a, d);
        const SAIStack st = GenerateSyntheticLf(ParseSceneSpec(text), a, 40, 44, 3, 1);
        for (const auto& s : DefaultEpiPlan(a, 40, 44)) {
          const Epi e = ExtractEpi(st, s.axis, s.spatial_index, s.angular_index);
          CHECK(EstimateEpiSlope(e) == d);
        }
      }
    }
  }
  const SAIStack neg = GenerateSyntheticLf(
      ParseSceneSpec("layer pattern=noise seed=3 disparity=-2 mask=full"), 5, 32, 32, 1, 1);
  CHECK(EstimateEpiSlope(ExtractEpi(neg, EpiAxis::kHorizontal, 16, 2)) == -2);
}

TEST_CASE("epi_psnr: cap, symmetry, monotone in noise") {
  std::mt19937_64 rng(5);
  const SAIStack ref = GenerateSyntheticLf(RandomScene(2, 1, 32, 32, 9), 5, 32, 32, 3, 9);
  const auto plan = DefaultEpiPlan(5, 32, 32);
  CHECK(plan.size() == 6);
  CHECK(EpiPsnr(ref, ref, plan) == kPsnrCap);
  double prev = kPsnrCap;
  std::uniform_real_distribution<double> u(-1, 1);
  for (double amp : {0.01, 0.03, 0.1, 0.3}) {
    std::vector<Image> views;
    std::mt19937_64 noise(77);
    for (const Image& v : ref.views()) {
      Image w = v;
      for (double& x : w.data()) x += amp * u(noise);
      views.push_back(w);
    }
    const SAIStack rec(5, views);
    const double p = EpiPsnr(ref, rec, plan);
    CHECK(p == doctest::Approx(EpiPsnr(rec, ref, plan)).epsilon(1e-14));
    CHECK(p < prev);
    prev = p;
  }
  const SAIStack other = GenerateSyntheticLf(RandomScene(1, 1, 32, 28, 2), 5, 32, 28, 3, 2);
  CHECK_THROWS_AS(EpiPsnr(ref, other, plan), Error);
}
