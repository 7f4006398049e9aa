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

#include "metrics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "error.hpp"
#include "util.hpp"

namespace sadn {

namespace {

void RequireSameShape(const Image& a, const Image& b) {
  if (a.height() != b.height() || a.width() != b.width() ||
      a.channels() != b.channels()) {
    Fail(ErrorCode::kInvalidArgument,
         "image shapes differ: " + std::to_string(a.height()) + "x" +
             std::to_string(a.width()) + "x" + std::to_string(a.channels()) +
             " vs " + std::to_string(b.height()) + "x" +
             std::to_string(b.width()) + "x" + std::to_string(b.channels()));
  }
}

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;

std::vector<double> GaussianWindow() {
  std::vector<double> g(kSsimWindow * kSsimWindow);
  const int r = kSsimWindow / 2;
  double total = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    for (int j = 0; j < kSsimWindow; ++j) {
      const double d2 = (i - r) * (i - r) + (j - r) * (j - r);
      g[i * kSsimWindow + j] = std::exp(-d2 / (2 * kSsimSigma * kSsimSigma));
      total += g[i * kSsimWindow + j];
    }
  }
  for (double& v : g) v /= total;
  return g;
}

}  // namespace

double Mse(const Image& a, const Image& b) {
  RequireSameShape(a, b);
  Require(a.size() > 0, "empty image");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

double Psnr(const Image& a, const Image& b, double peak) {
  Require(peak > 0, "peak must be positive");
  const double mse = Mse(a, b);
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

Image Luma(const Image& image) {
  if (image.channels() == 1) return image;
  Require(image.channels() == 3, "luma needs 1 or 3 channels");
  Image y(image.height(), image.width(), 1);
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      y.at(r, c, 0) = 0.299 * image.at(r, c, 0) + 0.587 * image.at(r, c, 1) +
                      0.114 * image.at(r, c, 2);
    }
  }
  return y;
}

double Ssim(const Image& a, const Image& b) {
  RequireSameShape(a, b);
  if (a.height() < kSsimWindow || a.width() < kSsimWindow) {
    Fail(ErrorCode::kInvalidArgument, "image smaller than the 11x11 SSIM window");
  }
  const Image x = Luma(a);
  const Image y = Luma(b);
  const auto g = GaussianWindow();
  const double c1 = 0.01 * 0.01;
  const double c2 = 0.03 * 0.03;
  double total = 0.0;
  const int rows = x.height() - kSsimWindow + 1;
  const int cols = x.width() - kSsimWindow + 1;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
      for (int i = 0; i < kSsimWindow; ++i) {
        for (int j = 0; j < kSsimWindow; ++j) {
          const double w = g[i * kSsimWindow + j];
          const double xv = x.at(r + i, c + j, 0);
          const double yv = y.at(r + i, c + j, 0);
          mx += w * xv;
          my += w * yv;
          sxx += w * xv * xv;
          syy += w * yv * yv;
          sxy += w * xv * yv;
        }
      }
      const double vx = sxx - mx * mx;
      const double vy = syy - my * my;
      const double cxy = sxy - mx * my;
      total += ((2 * mx * my + c1) * (2 * cxy + c2)) /
               ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
  }
  return total / (static_cast<double>(rows) * cols);
}

double PsnrSaiMean(const LensletImage& a, const LensletImage& b) {
  Require(a.angular() == b.angular(), "angular resolutions differ");
  const SAIStack sa = LiToSais(a);
  const SAIStack sb = LiToSais(b);
  double acc = 0.0;
  for (std::size_t i = 0; i < sa.views().size(); ++i) {
    acc += Psnr(sa.views()[i], sb.views()[i]);
  }
  return acc / static_cast<double>(sa.views().size());
}

double SsimSaiMean(const LensletImage& a, const LensletImage& b) {
  Require(a.angular() == b.angular(), "angular resolutions differ");
  const SAIStack sa = LiToSais(a);
  const SAIStack sb = LiToSais(b);
  double acc = 0.0;
  for (std::size_t i = 0; i < sa.views().size(); ++i) {
    acc += Ssim(sa.views()[i], sb.views()[i]);
  }
  return acc / static_cast<double>(sa.views().size());
}

std::vector<std::string> ValidateRdCurve(const RDCurve& curve) {
  if (curve.size() < 4) {
    Fail(ErrorCode::kInvalidArgument, "RD curve needs at least 4 points, got " +
                                          std::to_string(curve.size()));
  }
  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const RDPoint& p = curve[i];
    if (!(p.bpp > 0) || !std::isfinite(p.bpp) || !std::isfinite(p.psnr) ||
        !std::isfinite(p.ssim)) {
      Fail(ErrorCode::kInvalidArgument, "RD point " + std::to_string(i) +
                                            " needs finite values and bpp > 0");
    }
    if (p.ssim < -1.0 || p.ssim > 1.0) {
      Fail(ErrorCode::kInvalidArgument,
           "RD point " + std::to_string(i) + " has SSIM outside [-1, 1]");
    }
    if (i > 0) {
      if (!(p.bpp > curve[i - 1].bpp)) {
        Fail(ErrorCode::kInvalidArgument, "RD curve bpp must strictly increase");
      }
      if (p.psnr < curve[i - 1].psnr) {
        warnings.push_back("PSNR decreases between points " +
                           std::to_string(i - 1) + " and " + std::to_string(i));
      }
      if (p.ssim < curve[i - 1].ssim) {
        warnings.push_back("SSIM decreases between points " +
                           std::to_string(i - 1) + " and " + std::to_string(i));
      }
    }
  }
  return warnings;
}

std::string FormatRdCurveCsv(const RDCurve& curve) {
  std::string out = "bpp,psnr,ssim\n";
  char line[128];
  for (const RDPoint& p : curve) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", p.bpp, p.psnr,
                  p.ssim);
    out += line;
  }
  return out;
}

RDCurve ParseRdCurveCsv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) Fail(ErrorCode::kFormat, "empty RD curve file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "bpp,psnr,ssim") {
    Fail(ErrorCode::kFormat, "RD curve header must be 'bpp,psnr,ssim'");
  }
  RDCurve curve;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest = line;
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos;) {
      fields.push_back(rest.substr(0, pos));
      rest.remove_prefix(pos + 1);
    }
    fields.push_back(rest);
    if (fields.size() != 3) {
      Fail(ErrorCode::kFormat,
           "line " + std::to_string(line_no) + ": expected 3 fields");
    }
    curve.push_back(
        {ParseDouble(fields[0]), ParseDouble(fields[1]), ParseDouble(fields[2])});
  }
  return curve;
}

RDCurve ReadRdCurve(const std::string& path) {
  const auto bytes = ReadFileBytes(path);
  return ParseRdCurveCsv(
      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

void WriteRdCurve(const std::string& path, const RDCurve& curve) {
  const std::string text = FormatRdCurveCsv(curve);
  WriteFileBytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                 text.size()));
}

std::vector<double> FitCubic(const std::vector<double>& x,
                             const std::vector<double>& y) {
  Require(x.size() == y.size(), "fit needs equal-length inputs");
  if (x.size() < 4) Fail(ErrorCode::kInvalidArgument, "cubic fit needs >= 4 points");
  const auto n = static_cast<Eigen::Index>(x.size());
  // Center and scale the abscissa so the Vandermonde matrix stays well
  // conditioned, then expand back to plain coefficients.
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double center = 0.5 * (*lo_it + *hi_it);
  const double half = 0.5 * (*hi_it - *lo_it);
  if (!(half > 0)) Fail(ErrorCode::kNumeric, "degenerate fit: abscissae coincide");
  Eigen::MatrixXd v(n, 4);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = (x[i] - center) / half;
    v(i, 0) = 1;
    v(i, 1) = t;
    v(i, 2) = t * t;
    v(i, 3) = t * t * t;
    rhs(i) = y[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(v);
  qr.setThreshold(1e-10);
  if (qr.rank() < 4) {
    Fail(ErrorCode::kNumeric, "degenerate fit: fewer than 4 distinct abscissae");
  }
  const Eigen::VectorXd b = qr.solve(rhs);
  // p(x) = sum b_k ((x - center) / half)^k
  std::vector<double> c(4, 0.0);
  for (int k = 0; k < 4; ++k) {
    // Binomial expansion of (x - center)^k.
    const double scale = b(k) / std::pow(half, k);
    double binom = 1.0;
    for (int j = 0; j <= k; ++j) {
      c[j] += scale * binom * std::pow(-center, k - j);
      binom = binom * (k - j) / (j + 1);
    }
  }
  return c;
}

double EvalPoly(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double IntegratePoly(const std::vector<double>& c, double lo, double hi) {
  double acc = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double p = static_cast<double>(k + 1);
    acc += c[k] * (std::pow(hi, p) - std::pow(lo, p)) / p;
  }
  return acc;
}

namespace {

double Quality(const RDPoint& p, QualityAxis axis) {
  return axis == QualityAxis::kPsnr ? p.psnr : p.ssim;
}

// Mean of g(t) - f(t) over the overlap of the two abscissa ranges, where f
// and g are cubic fits of ordinate against abscissa.
double AverageGap(const std::vector<double>& xa, const std::vector<double>& ya,
                  const std::vector<double>& xt, const std::vector<double>& yt) {
  const auto fa = FitCubic(xa, ya);
  const auto ft = FitCubic(xt, yt);
  const double lo = std::max(*std::min_element(xa.begin(), xa.end()),
                             *std::min_element(xt.begin(), xt.end()));
  const double hi = std::min(*std::max_element(xa.begin(), xa.end()),
                             *std::max_element(xt.begin(), xt.end()));
  if (!(hi > lo)) {
    Fail(ErrorCode::kInvalidArgument, "RD curves do not overlap");
  }
  return (IntegratePoly(ft, lo, hi) - IntegratePoly(fa, lo, hi)) / (hi - lo);
}

}  // namespace

double BdRate(const RDCurve& anchor, const RDCurve& test, QualityAxis axis) {
  ValidateRdCurve(anchor);
  ValidateRdCurve(test);
  std::vector<double> qa, ra, qt, rt;
  for (const RDPoint& p : anchor) {
    qa.push_back(Quality(p, axis));
    ra.push_back(std::log10(p.bpp));
  }
  for (const RDPoint& p : test) {
    qt.push_back(Quality(p, axis));
    rt.push_back(std::log10(p.bpp));
  }
  const double avg = AverageGap(qa, ra, qt, rt);
  return 100.0 * (std::pow(10.0, avg) - 1.0);
}

double BdPsnr(const RDCurve& anchor, const RDCurve& test, QualityAxis axis) {
  ValidateRdCurve(anchor);
  ValidateRdCurve(test);
  std::vector<double> qa, ra, qt, rt;
  for (const RDPoint& p : anchor) {
    qa.push_back(Quality(p, axis));
    ra.push_back(std::log10(p.bpp));
  }
  for (const RDPoint& p : test) {
    qt.push_back(Quality(p, axis));
    rt.push_back(std::log10(p.bpp));
  }
  return AverageGap(ra, qa, rt, qt);
}

std::string FormatBdReportCsv(double bd_rate, double bd_quality,
                              QualityAxis axis) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "quality,bd_rate_percent,bd_quality\n%s,%.6f,%.6f\n",
                axis == QualityAxis::kPsnr ? "psnr" : "ssim", bd_rate, bd_quality);
  return buf;
}

std::string FormatBdReportText(double bd_rate, double bd_quality,
                               QualityAxis axis) {
  char buf[200];
  if (axis == QualityAxis::kPsnr) {
    std::snprintf(buf, sizeof buf, "BD-rate (PSNR): %+.3f %%\nBD-PSNR: %+.4f dB\n",
                  bd_rate, bd_quality);
  } else {
    std::snprintf(buf, sizeof buf, "BD-rate (SSIM): %+.3f %%\nBD-SSIM: %+.6f\n",
                  bd_rate, bd_quality);
  }
  return buf;
}

EpiSlicePlan DefaultEpiPlan(int angular, int spatial_h, int spatial_w) {
  Require(angular >= 1 && spatial_h >= 1 && spatial_w >= 1, "invalid stack size");
  const int center = angular / 2;
  EpiSlicePlan plan;
  for (int q = 1; q <= 3; ++q) {
    plan.push_back({EpiAxis::kHorizontal, q * spatial_h / 4, center});
  }
  for (int q = 1; q <= 3; ++q) {
    plan.push_back({EpiAxis::kVertical, q * spatial_w / 4, center});
  }
  return plan;
}

double EpiPsnr(const SAIStack& ref, const SAIStack& rec,
               const EpiSlicePlan& plan) {
  if (ref.angular() != rec.angular() ||
      ref.spatial_height() != rec.spatial_height() ||
      ref.spatial_width() != rec.spatial_width() ||
      ref.channels() != rec.channels()) {
    Fail(ErrorCode::kInvalidArgument, "EPI stacks have different dimensions");
  }
  Require(!plan.empty(), "empty EPI slice plan");
  double acc = 0.0;
  for (const EpiSliceSpec& s : plan) {
    const Epi a = ExtractEpi(ref, s.axis, s.spatial_index, s.angular_index);
    const Epi b = ExtractEpi(rec, s.axis, s.spatial_index, s.angular_index);
    acc += Psnr(a.slice, b.slice);
  }
  return acc / static_cast<double>(plan.size());
}

int EstimateEpiSlope(const Epi& epi, int max_shift) {
  const Image y = Luma(epi.slice);
  const int rows = y.height();
  const int cols = y.width();
  Require(max_shift >= 0 && max_shift < cols, "max_shift must be in [0, width)");
  Require(rows >= 2, "EPI needs at least two angular rows");
  std::map<int, int> votes;
  for (int r = 0; r + 1 < rows; ++r) {
    double best = -std::numeric_limits<double>::infinity();
    int best_shift = 0;
    for (int s = 0; s <= 2 * max_shift; ++s) {
      // Candidate order 0, -1, +1, -2, +2, ... so ties keep the smaller shift.
      const int shift = (s % 2 == 1) ? -(s + 1) / 2 : s / 2;
      // Compare row r at t with row r + 1 at t + shift.
      const int t0 = std::max(0, -shift);
      const int t1 = std::min(cols, cols - shift);
      const int n = t1 - t0;
      double ma = 0, mb = 0;
      for (int t = t0; t < t1; ++t) {
        ma += y.at(r, t, 0);
        mb += y.at(r + 1, t + shift, 0);
      }
      ma /= n;
      mb /= n;
      double sab = 0, saa = 0, sbb = 0;
      for (int t = t0; t < t1; ++t) {
        const double da = y.at(r, t, 0) - ma;
        const double db = y.at(r + 1, t + shift, 0) - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
      }
      const double denom = std::sqrt(saa * sbb);
      // Flat overlap: perfect match if the means agree, otherwise no match.
      const double score = denom > 1e-15 ? sab / denom
                           : (std::abs(ma - mb) < 1e-12 ? 1.0 : -1.0);
      if (score > best + 1e-12) {
        best = score;
        best_shift = shift;
      }
    }
    ++votes[best_shift];
  }
  int mode = 0;
  int count = -1;
  for (const auto& [shift, c] : votes) {
    if (c > count || (c == count && std::abs(shift) < std::abs(mode))) {
      mode = shift;
      count = c;
    }
  }
  return mode;
}

}  // namespace sadn
