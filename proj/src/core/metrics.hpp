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

#ifndef SADN_CORE_METRICS_HPP_
#define SADN_CORE_METRICS_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "lightfield.hpp"

namespace sadn {

// Returned by Psnr when the images are identical.
inline constexpr double kPsnrCap = 99.0;

double Mse(const Image& a, const Image& b);
double Psnr(const Image& a, const Image& b, double peak = 1.0);
// Single-scale SSIM on luma (BT.601 for RGB), 11x11 Gaussian window with
// sigma 1.5, K1 = 0.01, K2 = 0.03, peak 1. Mean over valid window positions.
double Ssim(const Image& a, const Image& b);
Image Luma(const Image& image);

// Mean over sub-aperture views instead of over the lenslet image.
double PsnrSaiMean(const LensletImage& a, const LensletImage& b);
double SsimSaiMean(const LensletImage& a, const LensletImage& b);

struct RDPoint {
  double bpp = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
};

using RDCurve = std::vector<RDPoint>;

// Fails on fewer than 4 points, bpp <= 0, non-increasing bpp or SSIM outside
// [-1, 1]. Returns warnings for quality that decreases with rate.
std::vector<std::string> ValidateRdCurve(const RDCurve& curve);

std::string FormatRdCurveCsv(const RDCurve& curve);
RDCurve ParseRdCurveCsv(std::string_view text);
RDCurve ReadRdCurve(const std::string& path);
void WriteRdCurve(const std::string& path, const RDCurve& curve);

enum class QualityAxis { kPsnr, kSsim };

// Cubic least-squares fit, lowest order first. Fails when the abscissae do
// not determine a cubic.
std::vector<double> FitCubic(const std::vector<double>& x,
                             const std::vector<double>& y);
double EvalPoly(const std::vector<double>& c, double x);
double IntegratePoly(const std::vector<double>& c, double lo, double hi);

// Average log-rate difference over the overlapping quality interval, as a
// percentage. Negative when the test curve needs fewer bits.
double BdRate(const RDCurve& anchor, const RDCurve& test,
              QualityAxis axis = QualityAxis::kPsnr);
// Average quality difference over the overlapping log-rate interval.
double BdPsnr(const RDCurve& anchor, const RDCurve& test,
              QualityAxis axis = QualityAxis::kPsnr);

std::string FormatBdReportCsv(double bd_rate, double bd_quality,
                              QualityAxis axis);
std::string FormatBdReportText(double bd_rate, double bd_quality,
                               QualityAxis axis);

struct EpiSliceSpec {
  EpiAxis axis;
  int spatial_index;
  int angular_index;
};

using EpiSlicePlan = std::vector<EpiSliceSpec>;

// Quartile rows and columns through the central view row / column.
EpiSlicePlan DefaultEpiPlan(int angular, int spatial_h, int spatial_w);

double EpiPsnr(const SAIStack& ref, const SAIStack& rec,
               const EpiSlicePlan& plan);

// Disparity in pixels per angular step: the most frequent integer shift
// between adjacent EPI rows, each found by normalized cross-correlation
// over shifts in [-max_shift, max_shift]. Ties favour the smaller shift.
int EstimateEpiSlope(const Epi& epi, int max_shift = 4);

}  // namespace sadn

#endif  // SADN_CORE_METRICS_HPP_
