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

#ifndef SADN_CORE_CODEC_HPP_
#define SADN_CORE_CODEC_HPP_

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "lightfield.hpp"
#include "sadn_net.hpp"

namespace sadn {

inline constexpr std::uint8_t kBitstreamVersion = 1;
inline constexpr int kDefaultCdfPrecision = 12;

struct BitstreamHeader {
  std::uint8_t version = kBitstreamVersion;
  std::uint8_t angular = 0;
  std::uint8_t channels = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint64_t model_checksum = 0;
  std::uint8_t lambda_index = 0;
  // Inclusive (min, max) latent symbol per channel, M entries.
  std::vector<std::pair<std::int16_t, std::int16_t>> symbol_ranges;
  std::uint64_t payload_length = 0;

  std::size_t SerializedSize() const;
  bool operator==(const BitstreamHeader&) const = default;
};

struct Bitstream {
  BitstreamHeader header;
  std::vector<std::uint8_t> payload;
};

// "SADN", version u8, A u8, C u8, reserved u8, H u32, W u32, checksum u64,
// lambda index u8, M x (min i16, max i16), payload length u64, payload.
// Integers little-endian.
std::vector<std::uint8_t> SerializeBitstream(const Bitstream& bs);
// The header does not carry M; the caller supplies it from the model.
Bitstream ParseBitstream(std::span<const std::uint8_t> bytes,
                         int latent_channels);
// Infers M from the declared payload length. Fails if no M, or more than
// one, is consistent with the byte count.
Bitstream ParseBitstream(std::span<const std::uint8_t> bytes);

struct EncodeResult {
  Bitstream bitstream;
  Tensor latent_hat;        // rounded latents, (1, M, h, w)
  double estimated_bits;    // sum of -log2 p under the continuous model
  double ideal_table_bits;  // sum of -log2 p under the integer tables
};

EncodeResult EncodeLf(const LensletImage& li, const SadnModel& model,
                      int lambda_index = 0,
                      int precision = kDefaultCdfPrecision);

struct DecodeResult {
  LensletImage reconstruction;
  Tensor latent_hat;
};

DecodeResult DecodeLf(const Bitstream& bs, const SadnModel& model,
                      int precision = kDefaultCdfPrecision);

// Payload bits per lenslet pixel, excluding the header.
double PayloadBpp(const Bitstream& bs);

}  // namespace sadn

#endif  // SADN_CORE_CODEC_HPP_
