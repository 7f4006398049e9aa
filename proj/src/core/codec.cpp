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

#include "codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "error.hpp"
#include "range_coder.hpp"
#include "util.hpp"

namespace sadn {

namespace {
constexpr char kMagic[4] = {'S', 'A', 'D', 'N'};
}

std::size_t BitstreamHeader::SerializedSize() const {
  return 4 + 4 + 4 + 4 + 8 + 1 + 4 * symbol_ranges.size() + 8;
}

std::vector<std::uint8_t> SerializeBitstream(const Bitstream& bs) {
  const BitstreamHeader& h = bs.header;
  Require(h.payload_length == bs.payload.size(),
          "header payload length does not match payload");
  ByteWriter w;
  w.Bytes(std::span(reinterpret_cast<const std::uint8_t*>(kMagic), 4));
  w.U8(h.version);
  w.U8(h.angular);
  w.U8(h.channels);
  w.U8(0);
  w.U32(h.height);
  w.U32(h.width);
  w.U64(h.model_checksum);
  w.U8(h.lambda_index);
  for (const auto& [lo, hi] : h.symbol_ranges) {
    w.I16(lo);
    w.I16(hi);
  }
  w.U64(h.payload_length);
  w.Bytes(bs.payload);
  return std::move(w.bytes());
}

Bitstream ParseBitstream(std::span<const std::uint8_t> bytes,
                         int latent_channels) {
  Require(latent_channels >= 1, "latent channel count must be >= 1");
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    Fail(ErrorCode::kFormat, "not a SADN bitstream (bad magic)");
  }
  ByteReader r(bytes);
  r.Bytes(4);
  Bitstream bs;
  BitstreamHeader& h = bs.header;
  h.version = r.U8();
  if (h.version != kBitstreamVersion) {
    Fail(ErrorCode::kFormat,
         "unsupported bitstream version " + std::to_string(h.version));
  }
  h.angular = r.U8();
  h.channels = r.U8();
  if (r.U8() != 0) Fail(ErrorCode::kFormat, "reserved header byte is nonzero");
  h.height = r.U32();
  h.width = r.U32();
  h.model_checksum = r.U64();
  h.lambda_index = r.U8();
  h.symbol_ranges.resize(latent_channels);
  for (auto& [lo, hi] : h.symbol_ranges) {
    lo = r.I16();
    hi = r.I16();
    if (lo > hi) Fail(ErrorCode::kFormat, "symbol range min > max");
  }
  h.payload_length = r.U64();
  if (h.payload_length != r.remaining()) {
    Fail(ErrorCode::kFormat, "declared payload length " +
                                 std::to_string(h.payload_length) +
                                 " but " + std::to_string(r.remaining()) +
                                 " bytes follow the header");
  }
  const auto payload = r.Bytes(h.payload_length);
  bs.payload.assign(payload.begin(), payload.end());
  return bs;
}

Bitstream ParseBitstream(std::span<const std::uint8_t> bytes) {
  // Fixed part: magic 4, four u8, two u32, checksum u64, lambda index u8.
  constexpr std::size_t kFixed = 4 + 4 + 8 + 8 + 1;
  if (bytes.size() < kFixed + 4 + 8) {
    Fail(ErrorCode::kFormat, "bitstream shorter than its header");
  }
  int found = 0;
  int candidates = 0;
  for (std::size_t m = 1; kFixed + 4 * m + 8 <= bytes.size(); ++m) {
    const std::size_t at = kFixed + 4 * m;
    std::uint64_t declared = 0;
    for (int i = 7; i >= 0; --i) declared = (declared << 8) | bytes[at + i];
    if (declared == bytes.size() - at - 8) {
      found = static_cast<int>(m);
      ++candidates;
    }
  }
  if (candidates == 0) {
    Fail(ErrorCode::kFormat, "no latent channel count matches the payload length");
  }
  if (candidates > 1) {
    Fail(ErrorCode::kFormat,
         "latent channel count is ambiguous; supply the model");
  }
  return ParseBitstream(bytes, found);
}

namespace {

// Latents are coded channel-major; symbol i belongs to channel i / plane.
std::vector<int> ChannelIndex(const Shape& s) {
  std::vector<int> index(s.numel());
  for (std::size_t i = 0; i < index.size(); ++i) {
    index[i] = static_cast<int>((i / s.plane()) % s.c);
  }
  return index;
}

}  // namespace

EncodeResult EncodeLf(const LensletImage& li, const SadnModel& model,
                      int lambda_index, int precision) {
  const SadnConfig& cfg = model.config();
  if (li.angular() != cfg.angular) {
    Fail(ErrorCode::kInvalidArgument,
         "image A=" + std::to_string(li.angular()) + " but model A=" +
             std::to_string(cfg.angular));
  }
  Require(lambda_index >= 0 && lambda_index <= 255, "lambda index must fit u8");
  const Tensor x = LensletToTensor(li);
  model.CheckInput(x.shape());
  const Tensor y_hat = Quantize(model.Encode(x).Detach(), QuantMode::kRound);
  const Shape ys = y_hat.shape();

  std::vector<int> symbols(ys.numel());
  std::vector<std::pair<int, int>> ranges(
      ys.c, {std::numeric_limits<int>::max(), std::numeric_limits<int>::min()});
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const double v = y_hat.data()[i];
    if (!std::isfinite(v) || v < std::numeric_limits<std::int16_t>::min() ||
        v > std::numeric_limits<std::int16_t>::max()) {
      Fail(ErrorCode::kNumeric, "latent value outside the int16 symbol range");
    }
    symbols[i] = static_cast<int>(v);
    auto& [lo, hi] = ranges[(i / ys.plane()) % ys.c];
    lo = std::min(lo, symbols[i]);
    hi = std::max(hi, symbols[i]);
  }
  const auto entropy = model.entropy_model();
  const auto tables = BuildCdfTables(entropy, precision, ranges);
  const auto index = ChannelIndex(ys);

  EncodeResult out;
  out.latent_hat = y_hat;
  out.bitstream.payload = RangeEncode(symbols, index, tables);
  out.ideal_table_bits = IdealCodeLengthBits(symbols, index, tables);
  double bits = 0.0;
  for (double p : LatentLikelihood(y_hat, entropy)) bits -= std::log2(p);
  out.estimated_bits = bits;

  BitstreamHeader& h = out.bitstream.header;
  h.angular = static_cast<std::uint8_t>(li.angular());
  h.channels = static_cast<std::uint8_t>(li.channels());
  h.height = static_cast<std::uint32_t>(li.height());
  h.width = static_cast<std::uint32_t>(li.width());
  h.model_checksum = model.Checksum();
  h.lambda_index = static_cast<std::uint8_t>(lambda_index);
  for (const auto& [lo, hi] : ranges) {
    h.symbol_ranges.emplace_back(static_cast<std::int16_t>(lo),
                                 static_cast<std::int16_t>(hi));
  }
  h.payload_length = out.bitstream.payload.size();
  return out;
}

DecodeResult DecodeLf(const Bitstream& bs, const SadnModel& model,
                      int precision) {
  const SadnConfig& cfg = model.config();
  const BitstreamHeader& h = bs.header;
  if (h.model_checksum != model.Checksum()) {
    Fail(ErrorCode::kModelMismatch,
         "bitstream was encoded with a different model");
  }
  if (h.angular != cfg.angular || h.channels != cfg.color_channels ||
      static_cast<int>(h.symbol_ranges.size()) != cfg.latent_channels) {
    Fail(ErrorCode::kModelMismatch, "bitstream geometry does not match model");
  }
  const int m = cfg.SizeMultiple();
  if (h.height == 0 || h.width == 0 || h.height % m || h.width % m) {
    Fail(ErrorCode::kFormat, "bitstream dimensions incompatible with model");
  }
  const int f = 1 << cfg.backbone_stages;
  const Shape ys{1, cfg.latent_channels, static_cast<int>(h.height) / f,
                 static_cast<int>(h.width) / f};
  std::vector<std::pair<int, int>> ranges;
  for (const auto& [lo, hi] : h.symbol_ranges) ranges.emplace_back(lo, hi);
  const auto tables = BuildCdfTables(model.entropy_model(), precision, ranges);
  const auto symbols = RangeDecode(bs.payload, ChannelIndex(ys), tables);
  std::vector<double> values(symbols.begin(), symbols.end());
  const Tensor y_hat = Tensor::FromData(ys, std::move(values));
  const Tensor rec = model.Decode(y_hat);
  return {LensletImage(TensorToImage(rec), cfg.angular), y_hat};
}

double PayloadBpp(const Bitstream& bs) {
  return 8.0 * static_cast<double>(bs.payload.size()) /
         (static_cast<double>(bs.header.height) * bs.header.width);
}

}  // namespace sadn
