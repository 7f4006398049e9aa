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

#ifndef SADN_CORE_LIGHTFIELD_HPP_
#define SADN_CORE_LIGHTFIELD_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sadn {

// Interleaved row-major H x W x C array of doubles.
class Image {
 public:
  Image() = default;
  Image(int height, int width, int channels);
  Image(int height, int width, int channels, std::vector<double> data);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }

  double at(int y, int x, int c) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  double& at(int y, int x, int c) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  bool operator==(const Image& other) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

// H x W x C pixel grid tiled by (H/A) x (W/A) micro-images of A x A angular
// samples. Intensities are normalized to [0, 1].
class LensletImage {
 public:
  LensletImage(Image pixels, int angular);

  int height() const { return pixels_.height(); }
  int width() const { return pixels_.width(); }
  int channels() const { return pixels_.channels(); }
  int angular() const { return angular_; }
  int spatial_height() const { return height() / angular_; }
  int spatial_width() const { return width() / angular_; }

  double at(int y, int x, int c) const { return pixels_.at(y, x, c); }
  const Image& pixels() const { return pixels_; }

  bool operator==(const LensletImage& other) const = default;

 private:
  Image pixels_;
  int angular_;
};

// A x A sub-aperture views stored row-major by u then v.
class SAIStack {
 public:
  SAIStack(int angular, std::vector<Image> views);

  int angular() const { return angular_; }
  int spatial_height() const { return views_.front().height(); }
  int spatial_width() const { return views_.front().width(); }
  int channels() const { return views_.front().channels(); }

  const Image& view(int u, int v) const {
    return views_[static_cast<std::size_t>(u) * angular_ + v];
  }
  const std::vector<Image>& views() const { return views_; }

  bool operator==(const SAIStack& other) const = default;

 private:
  int angular_;
  std::vector<Image> views_;
};

enum class EpiAxis { kHorizontal, kVertical };

struct Epi {
  Image slice;  // A rows, spatial extent columns
  EpiAxis axis;
  int spatial_index;
  int angular_index;
};

SAIStack LiToSais(const LensletImage& li);
LensletImage SaisToLi(const SAIStack& stack);

// Horizontal: row v is pixel row `spatial_index` of view (angular_index, v).
// Vertical: row u is pixel column `spatial_index` of view (u, angular_index).
Epi ExtractEpi(const SAIStack& stack, EpiAxis axis, int spatial_index,
               int angular_index);

// Keeps the central new_angular x new_angular views; drops the edge views.
SAIStack CropCentral(const SAIStack& stack, int new_angular);

// Patches are LensletImages with the same A, cut along micro-image
// boundaries. Ordered row-major over patch origins.
std::vector<LensletImage> ExtractPatches(const LensletImage& li, int patch_mi,
                                         int stride_mi);

// --- Synthetic scenes -------------------------------------------------------

enum class Pattern { kChecker, kStripes, kNoise, kRings };

struct Disparity {
  int num = 0;
  int den = 1;
  double value() const { return static_cast<double>(num) / den; }
};

struct Mask {
  enum class Kind { kFull, kRect, kDisk };
  Kind kind = Kind::kFull;
  // Rect: x0, y0, width, height. Disk: cx, cy, radius. Layer coordinates.
  double p0 = 0, p1 = 0, p2 = 0, p3 = 0;
  bool Contains(double row, double col) const;
};

struct Layer {
  Pattern pattern = Pattern::kNoise;
  std::uint64_t seed = 0;
  Disparity disparity;
  Mask mask;
};

// Fronto-parallel textured layers ordered back to front. The first layer is
// the background and must cover the whole frame.
struct SceneSpec {
  std::vector<Layer> layers;
};

// Text form, one layer per line, '#' comments:
//   layer pattern=noise seed=7 disparity=1/2 mask=rect:4,4,8,8
SceneSpec ParseSceneSpec(std::string_view text);
std::string FormatSceneSpec(const SceneSpec& spec);

// Background plus up to `foreground_layers` occluders with integer or
// half-integer disparities bounded by `max_disparity`.
SceneSpec RandomScene(int foreground_layers, int max_disparity, int spatial_h,
                      int spatial_w, std::uint64_t seed);

// View (u, v) renders each layer shifted by (d (u - c), d (v - c)) with
// c = (A - 1) / 2, composited back to front.
SAIStack GenerateSyntheticLf(const SceneSpec& spec, int angular, int spatial_h,
                             int spatial_w, int channels, std::uint64_t seed);

}  // namespace sadn

#endif  // SADN_CORE_LIGHTFIELD_HPP_
