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
#include <functional>
#include <optional>

#include "codec.hpp"
#include "error.hpp"
#include "lightfield.hpp"
#include "metrics.hpp"

using namespace sadn;

namespace {

SadnConfig SmallConfig() {
  SadnConfig c;
  c.angular = 2;
  c.features = 4;
  c.latent_channels = 6;
  c.color_channels = 3;
  c.backbone_stages = 2;
  return c;
}

LensletImage SceneLi(int angular, int spatial, std::uint64_t seed) {
  const SceneSpec scene = RandomScene(2, 1, spatial, spatial, seed);
  return SaisToLi(GenerateSyntheticLf(scene, angular, spatial, spatial, 3, seed));
}

std::optional<ErrorCode> CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("bitstream: serialize and parse round trip") {
  Bitstream bs;
  bs.header.angular = 13;
  bs.header.channels = 3;
  bs.header.height = 0x01020304;
  bs.header.width = 26;
  bs.header.model_checksum = 0xDEADBEEFCAFEF00Dull;
  bs.header.lambda_index = 7;
  bs.header.symbol_ranges = {{-3, 4}, {0, 0}, {-32768, 32767}};
  bs.payload = {1, 2, 3, 250};
  bs.header.payload_length = bs.payload.size();
  const auto bytes = SerializeBitstream(bs);
  CHECK(bytes.size() == bs.header.SerializedSize() + bs.payload.size());
  CHECK(bytes.size() == 4 + 4 + 8 + 8 + 1 + 3 * 4 + 8 + 4);
  CHECK(bytes[0] == 'S');
  CHECK(bytes[3] == 'N');
  // Little-endian height at offset 8.
  CHECK(bytes[8] == 0x04);
  CHECK(bytes[11] == 0x01);

  const Bitstream a = ParseBitstream(bytes, 3);
  CHECK(a.header == bs.header);
  CHECK(a.payload == bs.payload);
  const Bitstream b = ParseBitstream(bytes);
  CHECK(b.header == bs.header);

  CHECK(CodeOf([&] { ParseBitstream(bytes, 2); }) == ErrorCode::kFormat);
  auto bad = bytes;
  bad[0] = 'X';
  CHECK(CodeOf([&] { ParseBitstream(bad, 3); }) == ErrorCode::kFormat);
  bad = bytes;
  bad[4] = 9;
  CHECK(CodeOf([&] { ParseBitstream(bad, 3); }) == ErrorCode::kFormat);
  bad = bytes;
  bad[7] = 1;
  CHECK(CodeOf([&] { ParseBitstream(bad, 3); }) == ErrorCode::kFormat);
  bad = bytes;
  bad.pop_back();
  CHECK(CodeOf([&] { ParseBitstream(bad, 3); }) == ErrorCode::kFormat);
  CHECK(CodeOf([&] { ParseBitstream(std::vector<std::uint8_t>(5, 0)); }) ==
        ErrorCode::kFormat);
}

TEST_CASE("codec: latents survive the bitstream exactly") {
  const SadnConfig cfg = SmallConfig();
  const SadnModel model(cfg, 11);
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const LensletImage li = SceneLi(2, 8 * static_cast<int>(seed % 2 + 1), seed);
    const EncodeResult enc = EncodeLf(li, model, 2);
    const auto bytes = SerializeBitstream(enc.bitstream);
    const Bitstream parsed = ParseBitstream(bytes, cfg.latent_channels);
    const DecodeResult dec = DecodeLf(parsed, model);
    REQUIRE(dec.latent_hat.shape() == enc.latent_hat.shape());
    for (std::size_t i = 0; i < enc.latent_hat.numel(); ++i) {
      CHECK(dec.latent_hat.data()[i] == enc.latent_hat.data()[i]);
    }
    CHECK(parsed.header.lambda_index == 2);
    CHECK(parsed.header.height == static_cast<std::uint32_t>(li.height()));
    CHECK(dec.reconstruction.angular() == 2);

    // The decoder output equals a direct evaluation-mode forward pass.
    const ForwardResult fwd = model.Forward(LensletToTensor(li), ForwardMode::kEval);
    const Image direct = TensorToImage(fwd.reconstruction);
    CHECK(Psnr(direct, dec.reconstruction.pixels()) == kPsnrCap);

    const double actual = 8.0 * static_cast<double>(enc.bitstream.payload.size());
    CHECK(actual >= enc.ideal_table_bits);
    CHECK(enc.estimated_bits > 0);
    CHECK(PayloadBpp(enc.bitstream) ==
          doctest::Approx(actual / (li.height() * li.width())));
  }
}

TEST_CASE("codec: precision must agree between encoder and decoder tables") {
  const SadnModel model(SmallConfig(), 3);
  const LensletImage li = SceneLi(2, 8, 9);
  for (int precision : {10, 12, 16}) {
    const EncodeResult enc = EncodeLf(li, model, 0, precision);
    const DecodeResult dec = DecodeLf(enc.bitstream, model, precision);
    for (std::size_t i = 0; i < enc.latent_hat.numel(); ++i) {
      CHECK(dec.latent_hat.data()[i] == enc.latent_hat.data()[i]);
    }
  }
}

TEST_CASE("codec: model and geometry mismatches") {
  const SadnConfig cfg = SmallConfig();
  const SadnModel model(cfg, 5);
  const SadnModel other(cfg, 6);
  const LensletImage li = SceneLi(2, 8, 4);
  const EncodeResult enc = EncodeLf(li, model);
  CHECK(CodeOf([&] { DecodeLf(enc.bitstream, other); }) ==
        ErrorCode::kModelMismatch);

  SadnConfig a4 = cfg;
  a4.angular = 4;
  const SadnModel model4(a4, 5);
  CHECK(CodeOf([&] { EncodeLf(li, model4); }).has_value());

  Bitstream tampered = enc.bitstream;
  tampered.header.height += 8;
  CHECK(CodeOf([&] { DecodeLf(tampered, model); }).has_value());

  // A damaged payload either fails cleanly or decodes to something.
  Bitstream damaged = enc.bitstream;
  if (!damaged.payload.empty()) {
    damaged.payload.resize(damaged.payload.size() / 2);
    damaged.header.payload_length = damaged.payload.size();
    CHECK(CodeOf([&] { DecodeLf(damaged, model); }) == ErrorCode::kFormat);
  }
}

TEST_CASE("codec: inputs with bad dimensions are rejected") {
  const SadnModel model(SmallConfig(), 5);
  const LensletImage li(Image(12, 12, 3), 2);
  CHECK(CodeOf([&] { EncodeLf(li, model); }) == ErrorCode::kInvalidArgument);
}
