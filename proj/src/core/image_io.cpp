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

#include "image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "error.hpp"
#include "util.hpp"

namespace sadn {

namespace fs = std::filesystem;

namespace {

std::string Extension(const std::string& path) {
  std::string ext = fs::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

std::uint8_t ToByte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

Image ReadPng(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) Fail(ErrorCode::kIo, "cannot open " + path);
  png_byte sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    Fail(ErrorCode::kFormat, path + " is not a PNG file");
  }
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    Fail(ErrorCode::kIo, "libpng initialization failed");
  }
  // libpng reports errors by longjmp; collect rows only after setjmp.
  std::vector<png_byte> buffer;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    Fail(ErrorCode::kFormat, "corrupt PNG " + path);
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int channels = png_get_channels(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  buffer.resize(stride * height);
  rows.resize(height);
  for (int y = 0; y < height; ++y) rows[y] = buffer.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (channels != 1 && channels != 3) {
    Fail(ErrorCode::kFormat, "unsupported PNG channel count in " + path);
  }
  Image img(height, width, channels);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < channels; ++c)
        img.at(y, x, c) = rows[y][x * channels + c] / 255.0;
  return img;
}

void WritePng(const std::string& path, const Image& image) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) Fail(ErrorCode::kIo, "cannot write " + path);
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    Fail(ErrorCode::kIo, "libpng initialization failed");
  }
  const int w = image.width();
  const int h = image.height();
  const int ch = image.channels();
  std::vector<png_byte> buffer(static_cast<std::size_t>(w) * h * ch);
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    buffer[i] = ToByte(image.data()[i]);
  }
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y) rows[y] = buffer.data() + static_cast<std::size_t>(y) * w * ch;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    Fail(ErrorCode::kIo, "PNG write failed for " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, w, h, 8,
               ch == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// Netpbm header token, skipping whitespace and comments.
int ReadPnmInt(ByteReader& in) {
  std::string digits;
  while (in.remaining() > 0) {
    const char c = static_cast<char>(in.U8());
    if (c == '#') {
      while (in.remaining() > 0 && in.U8() != '\n') {
      }
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!digits.empty()) break;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      Fail(ErrorCode::kFormat, "bad netpbm header");
    }
    digits.push_back(c);
  }
  return static_cast<int>(ParseInt(digits));
}

Image ReadPnm(const std::string& path) {
  const auto bytes = ReadFileBytes(path);
  ByteReader in(bytes);
  if (in.remaining() < 2 || in.U8() != 'P') {
    Fail(ErrorCode::kFormat, path + " is not a binary PPM/PGM file");
  }
  const char kind = static_cast<char>(in.U8());
  if (kind != '5' && kind != '6') {
    Fail(ErrorCode::kFormat, path + ": only P5/P6 netpbm is supported");
  }
  const int channels = kind == '6' ? 3 : 1;
  const int w = ReadPnmInt(in);
  const int h = ReadPnmInt(in);
  const int maxval = ReadPnmInt(in);
  if (maxval != 255) Fail(ErrorCode::kFormat, path + ": maxval must be 255");
  const auto px = in.Bytes(static_cast<std::size_t>(w) * h * channels);
  Image img(h, w, channels);
  for (std::size_t i = 0; i < px.size(); ++i) img.data()[i] = px[i] / 255.0;
  return img;
}

void WritePnm(const std::string& path, const Image& image, bool color) {
  if ((image.channels() == 3) != color) {
    Fail(ErrorCode::kInvalidArgument,
         path + ": channel count does not match netpbm flavour");
  }
  const std::string header = std::string(color ? "P6" : "P5") + "\n" +
                             std::to_string(image.width()) + " " +
                             std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (double v : image.data()) out.push_back(ToByte(v));
  WriteFileBytes(path, out);
}

}  // namespace

Image ReadImage(const std::string& path) {
  const std::string ext = Extension(path);
  if (ext == ".png") return ReadPng(path);
  if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") return ReadPnm(path);
  Fail(ErrorCode::kFormat, "unsupported image extension '" + ext + "'");
}

void WriteImage(const std::string& path, const Image& image) {
  const std::string ext = Extension(path);
  if (ext == ".png") return WritePng(path, image);
  if (ext == ".ppm") return WritePnm(path, image, true);
  if (ext == ".pgm") return WritePnm(path, image, false);
  Fail(ErrorCode::kFormat, "unsupported image extension '" + ext + "'");
}

Image QuantizeTo8Bit(const Image& image) {
  Image out = image;
  for (double& v : out.data()) v = ToByte(v) / 255.0;
  return out;
}

std::string SidecarPath(const std::string& image_path) {
  return image_path + ".meta";
}

LensletImage ReadLenslet(const std::string& path, std::optional<int> angular) {
  Image px = ReadImage(path);
  if (!angular) {
    const std::string meta = SidecarPath(path);
    if (!fs::exists(meta)) {
      Fail(ErrorCode::kInvalidArgument,
           "angular resolution not given and no sidecar " + meta);
    }
    const auto bytes = ReadFileBytes(meta);
    const auto kv = ParseKeyValues(std::string(bytes.begin(), bytes.end()));
    const auto it = kv.find("A");
    if (it == kv.end()) Fail(ErrorCode::kFormat, meta + " lacks A=");
    angular = static_cast<int>(ParseInt(it->second));
    if (const auto c = kv.find("C"); c != kv.end()) {
      if (ParseInt(c->second) != px.channels()) {
        Fail(ErrorCode::kFormat, meta + ": C does not match image channels");
      }
    }
  }
  if (*angular < 1 || px.height() % *angular || px.width() % *angular) {
    Fail(ErrorCode::kFormat, path + ": size " + std::to_string(px.height()) +
                                 "x" + std::to_string(px.width()) +
                                 " not divisible by A=" +
                                 std::to_string(*angular));
  }
  return LensletImage(std::move(px), *angular);
}

void WriteLenslet(const std::string& path, const LensletImage& li) {
  WriteImage(path, li.pixels());
  const std::string meta = "A=" + std::to_string(li.angular()) +
                           "\nC=" + std::to_string(li.channels()) + "\n";
  WriteFileBytes(SidecarPath(path),
                 std::span(reinterpret_cast<const std::uint8_t*>(meta.data()),
                           meta.size()));
}

namespace {
std::string ViewName(int u, int v) {
  char name[32];
  std::snprintf(name, sizeof name, "view_%02d_%02d.png", u, v);
  return name;
}
}  // namespace

void WriteSaiDirectory(const std::string& dir, const SAIStack& stack) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) Fail(ErrorCode::kIo, "cannot create directory " + dir);
  for (int u = 0; u < stack.angular(); ++u)
    for (int v = 0; v < stack.angular(); ++v)
      WriteImage((fs::path(dir) / ViewName(u, v)).string(), stack.view(u, v));
}

SAIStack ReadSaiDirectory(const std::string& dir) {
  if (!fs::is_directory(dir)) Fail(ErrorCode::kIo, dir + " is not a directory");
  int count = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("view_", 0) == 0 && Extension(name) == ".png") ++count;
  }
  const int a = static_cast<int>(std::lround(std::sqrt(count)));
  if (count == 0 || a * a != count) {
    Fail(ErrorCode::kFormat, dir + ": view count " + std::to_string(count) +
                                 " is not a perfect square");
  }
  std::vector<Image> views;
  for (int u = 0; u < a; ++u) {
    for (int v = 0; v < a; ++v) {
      const fs::path p = fs::path(dir) / ViewName(u, v);
      if (!fs::exists(p)) Fail(ErrorCode::kFormat, "missing view " + p.string());
      views.push_back(ReadImage(p.string()));
    }
  }
  return SAIStack(a, std::move(views));
}

}  // namespace sadn
