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

#ifndef SADN_CORE_RANGE_CODER_HPP_
#define SADN_CORE_RANGE_CODER_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "entropy.hpp"

namespace sadn {

// Carry-propagating range coder: 32-bit range, 33-bit low, byte-wise
// renormalization. Frequencies are given as (cumulative start, size) on a
// 2^precision scale.
class RangeEncoder {
 public:
  explicit RangeEncoder(int precision);
  void Encode(std::uint32_t start, std::uint32_t size);
  // Flushes the state; the encoder must not be used afterwards.
  std::vector<std::uint8_t> Finish();

 private:
  void ShiftLow();

  int precision_;
  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint8_t cache_ = 0;
  std::uint64_t cache_size_ = 1;
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
 public:
  RangeDecoder(std::span<const std::uint8_t> bytes, int precision);
  // Cumulative frequency of the next symbol, in [0, 2^precision).
  std::uint32_t Peek();
  void Consume(std::uint32_t start, std::uint32_t size);
  // Throws ErrorCode::kFormat unless the stream was consumed exactly.
  void Finish() const;

 private:
  std::uint8_t NextByte();

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  int precision_;
  std::uint32_t code_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint32_t step_ = 0;
};

// Symbol i is coded with tables[table_index[i]]. All tables must share one
// precision.
std::vector<std::uint8_t> RangeEncode(std::span<const int> symbols,
                                      std::span<const int> table_index,
                                      std::span<const CdfTable> tables);
std::vector<int> RangeDecode(std::span<const std::uint8_t> bytes,
                             std::span<const int> table_index,
                             std::span<const CdfTable> tables);

// Single-table conveniences.
std::vector<std::uint8_t> RangeEncode(std::span<const int> symbols,
                                      const CdfTable& table);
std::vector<int> RangeDecode(std::span<const std::uint8_t> bytes,
                             const CdfTable& table, std::size_t count);

// Sum of -log2(freq / 2^precision) over the sequence.
double IdealCodeLengthBits(std::span<const int> symbols,
                           std::span<const int> table_index,
                           std::span<const CdfTable> tables);

}  // namespace sadn

#endif  // SADN_CORE_RANGE_CODER_HPP_
