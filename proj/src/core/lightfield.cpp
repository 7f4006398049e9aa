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

#include "lightfield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

#include "error.hpp"
#include "util.hpp"

namespace sadn {

Image::Image(int height, int width, int channels)
    : height_(height), width_(width), channels_(channels) {
  Require(height >= 0 && width >= 0 && channels >= 1, "invalid image shape");
  data_.assign(static_cast<std::size_t>(height) * width * channels, 0.0);
}

Image::Image(int height, int width, int channels, std::vector<double> data)
    : height_(height), width_(width), channels_(channels),
      data_(std::move(data)) {
  Require(height >= 0 && width >= 0 && channels >= 1, "invalid image shape");
  Require(data_.size() == static_cast<std::size_t>(height) * width * channels,
          "image data length does not match shape");
}

LensletImage::LensletImage(Image pixels, int angular)
    : pixels_(std::move(pixels)), angular_(angular) {
  Require(angular_ >= 1, "angular resolution must be >= 1");
  Require(pixels_.height() > 0 && pixels_.width() > 0, "empty lenslet image");
  Require(pixels_.height() % angular_ == 0 && pixels_.width() % angular_ == 0,
          "lenslet dimensions " + std::to_string(pixels_.height()) + "x" +
              std::to_string(pixels_.width()) + " not divisible by A=" +
              std::to_string(angular_));
  Require(pixels_.channels() == 1 || pixels_.channels() == 3,
          "lenslet image must have 1 or 3 channels");
  for (double v : pixels_.data()) {
    Require(v >= 0.0 && v <= 1.0, "lenslet intensity outside [0,1]");
  }
}

SAIStack::SAIStack(int angular, std::vector<Image> views)
    : angular_(angular), views_(std::move(views)) {
  Require(angular_ >= 1, "angular resolution must be >= 1");
  Require(views_.size() == static_cast<std::size_t>(angular_) * angular_,
          "SAI stack needs exactly A*A views");
  const Image& first = views_.front();
  Require(first.height() > 0 && first.width() > 0, "empty view");
  for (const Image& v : views_) {
    Require(v.height() == first.height() && v.width() == first.width() &&
                v.channels() == first.channels(),
            "inconsistent view shapes in SAI stack");
  }
}

SAIStack LiToSais(const LensletImage& li) {
  const int a = li.angular();
  const int sh = li.spatial_height();
  const int sw = li.spatial_width();
  const int ch = li.channels();
  std::vector<Image> views;
  views.reserve(static_cast<std::size_t>(a) * a);
  for (int u = 0; u < a; ++u) {
    for (int v = 0; v < a; ++v) {
      Image view(sh, sw, ch);
      for (int s = 0; s < sh; ++s)
        for (int t = 0; t < sw; ++t)
          for (int c = 0; c < ch; ++c)
            view.at(s, t, c) = li.at(s * a + u, t * a + v, c);
      views.push_back(std::move(view));
    }
  }
  return SAIStack(a, std::move(views));
}

LensletImage SaisToLi(const SAIStack& stack) {
  const int a = stack.angular();
  const int sh = stack.spatial_height();
  const int sw = stack.spatial_width();
  const int ch = stack.channels();
  Image px(sh * a, sw * a, ch);
  for (int u = 0; u < a; ++u)
    for (int v = 0; v < a; ++v) {
      const Image& view = stack.view(u, v);
      for (int s = 0; s < sh; ++s)
        for (int t = 0; t < sw; ++t)
          for (int c = 0; c < ch; ++c)
            px.at(s * a + u, t * a + v, c) = view.at(s, t, c);
    }
  return LensletImage(std::move(px), a);
}

Epi ExtractEpi(const SAIStack& stack, EpiAxis axis, int spatial_index,
               int angular_index) {
  const int a = stack.angular();
  const int ch = stack.channels();
  Require(angular_index >= 0 && angular_index < a,
          "EPI angular index out of range");
  if (axis == EpiAxis::kHorizontal) {
    Require(spatial_index >= 0 && spatial_index < stack.spatial_height(),
            "EPI spatial row out of range");
    const int sw = stack.spatial_width();
    Image slice(a, sw, ch);
    for (int v = 0; v < a; ++v) {
      const Image& view = stack.view(angular_index, v);
      for (int t = 0; t < sw; ++t)
        for (int c = 0; c < ch; ++c)
          slice.at(v, t, c) = view.at(spatial_index, t, c);
    }
    return {std::move(slice), axis, spatial_index, angular_index};
  }
  Require(spatial_index >= 0 && spatial_index < stack.spatial_width(),
          "EPI spatial column out of range");
  const int sh = stack.spatial_height();
  Image slice(a, sh, ch);
  for (int u = 0; u < a; ++u) {
    const Image& view = stack.view(u, angular_index);
    for (int s = 0; s < sh; ++s)
      for (int c = 0; c < ch; ++c)
        slice.at(u, s, c) = view.at(s, spatial_index, c);
  }
  return {std::move(slice), axis, spatial_index, angular_index};
}

SAIStack CropCentral(const SAIStack& stack, int new_angular) {
  const int a = stack.angular();
  Require(new_angular >= 1 && new_angular <= a,
          "crop angular resolution must be in [1, A]");
  Require((a - new_angular) % 2 == 0,
          "central crop needs A - A' to be even");
  const int off = (a - new_angular) / 2;
  std::vector<Image> views;
  for (int u = 0; u < new_angular; ++u)
    for (int v = 0; v < new_angular; ++v)
      views.push_back(stack.view(u + off, v + off));
  return SAIStack(new_angular, std::move(views));
}

std::vector<LensletImage> ExtractPatches(const LensletImage& li, int patch_mi,
                                         int stride_mi) {
  Require(patch_mi >= 1 && stride_mi >= 1,
          "patch size and stride must be >= 1 micro-image");
  const int a = li.angular();
  const int mi_h = li.spatial_height();
  const int mi_w = li.spatial_width();
  Require(patch_mi <= mi_h && patch_mi <= mi_w,
          "patch larger than image: " + std::to_string(patch_mi * a) +
              " px vs " + std::to_string(li.height()) + "x" +
              std::to_string(li.width()));
  const int side = patch_mi * a;
  const int ch = li.channels();
  std::vector<LensletImage> out;
  for (int py = 0; py + patch_mi <= mi_h; py += stride_mi) {
    for (int px = 0; px + patch_mi <= mi_w; px += stride_mi) {
      Image patch(side, side, ch);
      for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x)
          for (int c = 0; c < ch; ++c)
            patch.at(y, x, c) = li.at(py * a + y, px * a + x, c);
      out.emplace_back(std::move(patch), a);
    }
  }
  return out;
}

// --- Synthetic scenes -------------------------------------------------------

bool Mask::Contains(double row, double col) const {
  switch (kind) {
    case Kind::kFull:
      return true;
    case Kind::kRect:
      return col >= p0 && col < p0 + p2 && row >= p1 && row < p1 + p3;
    case Kind::kDisk: {
      const double dx = col - p0;
      const double dy = row - p1;
      return dx * dx + dy * dy <= p2 * p2;
    }
  }
  return false;
}

namespace {

double Smooth(double t) { return t * t * (3.0 - 2.0 * t); }

double ValueNoise(std::uint64_t seed, double row, double col, double cell) {
  const double fy = row / cell;
  const double fx = col / cell;
  const double y0 = std::floor(fy);
  const double x0 = std::floor(fx);
  const double ty = Smooth(fy - y0);
  const double tx = Smooth(fx - x0);
  auto lattice = [&](double y, double x) {
    return HashUnit(seed, static_cast<std::int64_t>(y),
                    static_cast<std::int64_t>(x));
  };
  const double top = lattice(y0, x0) * (1 - tx) + lattice(y0, x0 + 1) * tx;
  const double bot =
      lattice(y0 + 1, x0) * (1 - tx) + lattice(y0 + 1, x0 + 1) * tx;
  return top * (1 - ty) + bot * ty;
}

// Scalar pattern in [0, 1] at continuous layer coordinates.
double PatternValue(Pattern pattern, std::uint64_t seed, double row,
                    double col) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  switch (pattern) {
    case Pattern::kChecker: {
      const double cell = 2.0 + static_cast<double>(HashBits(seed, 1) % 5);
      const auto iy = static_cast<std::int64_t>(std::floor(row / cell));
      const auto ix = static_cast<std::int64_t>(std::floor(col / cell));
      return ((iy + ix) & 1) ? 0.85 : 0.15;
    }
    case Pattern::kStripes: {
      const double period = 3.0 + static_cast<double>(HashBits(seed, 2) % 7);
      const double theta = HashUnit(seed, 3, 0) * std::numbers::pi;
      const double p = col * std::cos(theta) + row * std::sin(theta);
      return 0.5 + 0.5 * std::sin(kTwoPi * p / period);
    }
    case Pattern::kNoise: {
      const double cell = 3.0 + static_cast<double>(HashBits(seed, 4) % 4);
      return 0.65 * ValueNoise(seed, row, col, cell) +
             0.35 * ValueNoise(seed ^ 0x9e37u, row, col, cell / 2.0);
    }
    case Pattern::kRings: {
      const double period = 2.0 + static_cast<double>(HashBits(seed, 5) % 5);
      const double cy = HashUnit(seed, 6, 0) * 16.0;
      const double cx = HashUnit(seed, 7, 0) * 16.0;
      const double r = std::hypot(row - cy, col - cx);
      return 0.5 + 0.5 * std::cos(kTwoPi * r / period);
    }
  }
  return 0.0;
}

Pattern ParsePattern(std::string_view name) {
  if (name == "checker") return Pattern::kChecker;
  if (name == "stripes") return Pattern::kStripes;
  if (name == "noise") return Pattern::kNoise;
  if (name == "rings") return Pattern::kRings;
  Fail(ErrorCode::kFormat, "unknown pattern '" + std::string(name) + "'");
}

const char* PatternName(Pattern p) {
  switch (p) {
    case Pattern::kChecker: return "checker";
    case Pattern::kStripes: return "stripes";
    case Pattern::kNoise: return "noise";
    case Pattern::kRings: return "rings";
  }
  return "?";
}

std::vector<double> ParseNumberList(std::string_view s, std::size_t count) {
  std::vector<double> out;
  std::string item;
  std::istringstream in{std::string(s)};
  while (std::getline(in, item, ',')) out.push_back(ParseDouble(item));
  if (out.size() != count) {
    Fail(ErrorCode::kFormat, "mask needs " + std::to_string(count) +
                                 " numbers, got '" + std::string(s) + "'");
  }
  return out;
}

Mask ParseMask(std::string_view s) {
  Mask m;
  if (s == "full") return m;
  const auto colon = s.find(':');
  if (colon == std::string_view::npos) {
    Fail(ErrorCode::kFormat, "bad mask '" + std::string(s) + "'");
  }
  const std::string_view kind = s.substr(0, colon);
  const std::string_view args = s.substr(colon + 1);
  if (kind == "rect") {
    const auto v = ParseNumberList(args, 4);
    m = {Mask::Kind::kRect, v[0], v[1], v[2], v[3]};
  } else if (kind == "disk") {
    const auto v = ParseNumberList(args, 3);
    m = {Mask::Kind::kDisk, v[0], v[1], v[2], 0.0};
  } else {
    Fail(ErrorCode::kFormat, "unknown mask kind '" + std::string(kind) + "'");
  }
  return m;
}

Disparity ParseDisparity(std::string_view s) {
  Disparity d;
  const auto slash = s.find('/');
  d.num = static_cast<int>(ParseInt(s.substr(0, slash)));
  if (slash != std::string_view::npos) {
    d.den = static_cast<int>(ParseInt(s.substr(slash + 1)));
  }
  if (d.den <= 0) Fail(ErrorCode::kFormat, "disparity denominator must be > 0");
  return d;
}

}  // namespace

SceneSpec ParseSceneSpec(std::string_view text) {
  SceneSpec spec;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    std::istringstream tokens(line);
    std::string word;
    if (!(tokens >> word)) continue;
    if (word != "layer") {
      Fail(ErrorCode::kFormat,
           "scene line " + std::to_string(line_no) + ": expected 'layer'");
    }
    Layer layer;
    while (tokens >> word) {
      const auto eq = word.find('=');
      if (eq == std::string::npos) {
        Fail(ErrorCode::kFormat, "scene line " + std::to_string(line_no) +
                                     ": expected key=value, got " + word);
      }
      const std::string key = word.substr(0, eq);
      const std::string value = word.substr(eq + 1);
      if (key == "pattern") {
        layer.pattern = ParsePattern(value);
      } else if (key == "seed") {
        layer.seed = ParseU64(value);
      } else if (key == "disparity") {
        layer.disparity = ParseDisparity(value);
      } else if (key == "mask") {
        layer.mask = ParseMask(value);
      } else {
        Fail(ErrorCode::kFormat, "scene line " + std::to_string(line_no) +
                                     ": unknown key " + key);
      }
    }
    spec.layers.push_back(layer);
  }
  return spec;
}

std::string FormatSceneSpec(const SceneSpec& spec) {
  std::ostringstream out;
  out.precision(17);
  for (const Layer& l : spec.layers) {
    out << "layer pattern=" << PatternName(l.pattern) << " seed=" << l.seed
        << " disparity=" << l.disparity.num;
    if (l.disparity.den != 1) out << '/' << l.disparity.den;
    out << " mask=";
    switch (l.mask.kind) {
      case Mask::Kind::kFull:
        out << "full";
        break;
      case Mask::Kind::kRect:
        out << "rect:" << l.mask.p0 << ',' << l.mask.p1 << ',' << l.mask.p2
            << ',' << l.mask.p3;
        break;
      case Mask::Kind::kDisk:
        out << "disk:" << l.mask.p0 << ',' << l.mask.p1 << ',' << l.mask.p2;
        break;
    }
    out << '\n';
  }
  return out.str();
}

SceneSpec RandomScene(int foreground_layers, int max_disparity, int spatial_h,
                      int spatial_w, std::uint64_t seed) {
  Require(foreground_layers >= 0 && max_disparity >= 0,
          "invalid random scene parameters");
  SplitMix64 rng(seed);
  auto pick = [&](int lo, int hi) {  // inclusive
    return lo + static_cast<int>(rng.Next() % static_cast<std::uint64_t>(
                                                  hi - lo + 1));
  };
  SceneSpec spec;
  Layer bg;
  bg.pattern = Pattern::kNoise;
  bg.seed = rng.Next();
  bg.disparity = {pick(-max_disparity, max_disparity), 2};
  spec.layers.push_back(bg);
  constexpr Pattern kPatterns[] = {Pattern::kChecker, Pattern::kStripes,
                                   Pattern::kNoise, Pattern::kRings};
  for (int i = 0; i < foreground_layers; ++i) {
    Layer l;
    l.pattern = kPatterns[pick(0, 3)];
    l.seed = rng.Next();
    l.disparity = {pick(-2 * max_disparity, 2 * max_disparity), 2};
    const double size_h = spatial_h * (0.25 + 0.3 * rng.Unit());
    const double size_w = spatial_w * (0.25 + 0.3 * rng.Unit());
    const double y0 = rng.Unit() * (spatial_h - size_h);
    const double x0 = rng.Unit() * (spatial_w - size_w);
    if (pick(0, 1) == 0) {
      l.mask = {Mask::Kind::kRect, x0, y0, size_w, size_h};
    } else {
      l.mask = {Mask::Kind::kDisk, x0 + size_w / 2, y0 + size_h / 2,
                std::min(size_w, size_h) / 2, 0.0};
    }
    spec.layers.push_back(l);
  }
  return spec;
}

SAIStack GenerateSyntheticLf(const SceneSpec& spec, int angular, int spatial_h,
                             int spatial_w, int channels, std::uint64_t seed) {
  Require(angular >= 1, "angular resolution must be >= 1");
  Require(spatial_h >= 1 && spatial_w >= 1, "spatial size must be >= 1");
  Require(channels == 1 || channels == 3, "channels must be 1 or 3");
  Require(!spec.layers.empty(), "scene has no layers");
  Require(spec.layers.front().mask.kind == Mask::Kind::kFull,
          "background layer must have a full mask");
  for (const Layer& l : spec.layers) {
    Require(l.disparity.den > 0, "disparity denominator must be > 0");
    const double span = std::abs(l.disparity.value()) * (angular - 1);
    if (!(span < spatial_w && span < spatial_h)) {
      Fail(ErrorCode::kInvalidArgument,
           "disparity " + std::to_string(l.disparity.value()) +
               " too large for spatial extent at A=" + std::to_string(angular));
    }
  }
  // Per-layer colors: two endpoints per channel mixed by the pattern value.
  struct Palette {
    double lo[3];
    double hi[3];
  };
  std::vector<Palette> palettes;
  std::vector<std::uint64_t> layer_seeds;
  for (const Layer& l : spec.layers) {
    const std::uint64_t s = Mix64(l.seed ^ Mix64(seed));
    layer_seeds.push_back(s);
    Palette p{};
    for (int c = 0; c < 3; ++c) {
      const double a = 0.05 + 0.4 * HashUnit(s, 100 + c, 0);
      const double b = 0.55 + 0.4 * HashUnit(s, 200 + c, 0);
      const bool swap = HashBits(s, 300 + c) & 1;
      p.lo[c] = swap ? b : a;
      p.hi[c] = swap ? a : b;
    }
    palettes.push_back(p);
  }

  const double center = (angular - 1) / 2.0;
  std::vector<Image> views;
  views.reserve(static_cast<std::size_t>(angular) * angular);
  for (int u = 0; u < angular; ++u) {
    for (int v = 0; v < angular; ++v) {
      Image view(spatial_h, spatial_w, channels);
      for (int s = 0; s < spatial_h; ++s) {
        for (int t = 0; t < spatial_w; ++t) {
          for (std::size_t li = 0; li < spec.layers.size(); ++li) {
            const Layer& l = spec.layers[li];
            const double d = l.disparity.value();
            const double row = s - d * (u - center);
            const double col = t - d * (v - center);
            if (!l.mask.Contains(row, col)) continue;
            const double w = PatternValue(l.pattern, layer_seeds[li], row, col);
            for (int c = 0; c < channels; ++c) {
              const int pc = channels == 1 ? 1 : c;
              const double val =
                  palettes[li].lo[pc] + (palettes[li].hi[pc] -
                                         palettes[li].lo[pc]) * w;
              view.at(s, t, c) = std::clamp(val, 0.0, 1.0);
            }
          }
        }
      }
      views.push_back(std::move(view));
    }
  }
  return SAIStack(angular, std::move(views));
}

}  // namespace sadn
