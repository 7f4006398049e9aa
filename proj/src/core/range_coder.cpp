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

#include "range_coder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "error.hpp"

namespace sadn {

namespace {
constexpr std::uint32_t kTop = 1u << 24;
}

RangeEncoder::RangeEncoder(int precision) : precision_(precision) {
  Require(precision >= 1 && precision <= 16, "range coder precision out of range");
}

void RangeEncoder::Encode(std::uint32_t start, std::uint32_t size) {
  const std::uint32_t r = range_ >> precision_;
  low_ += static_cast<std::uint64_t>(r) * start;
  range_ = r * size;
  while (range_ < kTop) {
    range_ <<= 8;
    ShiftLow();
  }
}

// A byte is held back in cache_ (followed by cache_size_ - 1 pending 0xFF
// bytes) until it is known that no carry can reach it.
void RangeEncoder::ShiftLow() {
  if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    const auto carry = static_cast<std::uint8_t>(low_ >> 32);
    std::uint8_t temp = cache_;
    do {
      out_.push_back(static_cast<std::uint8_t>(temp + carry));
      temp = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<std::uint8_t>(low_ >> 24);
  }
  ++cache_size_;
  low_ = (low_ & 0x00FFFFFFu) << 8;
}

std::vector<std::uint8_t> RangeEncoder::Finish() {
  for (int i = 0; i < 5; ++i) ShiftLow();
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> bytes, int precision)
    : bytes_(bytes), precision_(precision) {
  Require(precision >= 1 && precision <= 16, "range coder precision out of range");
  for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | NextByte();
}

std::uint8_t RangeDecoder::NextByte() {
  if (pos_ >= bytes_.size()) {
    Fail(ErrorCode::kFormat, "range-coded payload truncated");
  }
  return bytes_[pos_++];
}

std::uint32_t RangeDecoder::Peek() {
  step_ = range_ >> precision_;
  const std::uint32_t v = code_ / step_;
  if (v >= (1u << precision_)) {
    Fail(ErrorCode::kFormat, "corrupt range-coded payload");
  }
  return v;
}

void RangeDecoder::Consume(std::uint32_t start, std::uint32_t size) {
  code_ -= step_ * start;
  range_ = step_ * size;
  while (range_ < kTop) {
    code_ = (code_ << 8) | NextByte();
    range_ <<= 8;
  }
}

void RangeDecoder::Finish() const {
  if (pos_ != bytes_.size()) {
    Fail(ErrorCode::kFormat,
         "range-coded payload has " + std::to_string(bytes_.size() - pos_) +
             " unconsumed bytes");
  }
}

namespace {

int CommonPrecision(std::span<const CdfTable> tables) {
  Require(!tables.empty(), "no CDF tables");
  const int precision = tables.front().precision;
  for (const CdfTable& t : tables) {
    Require(t.precision == precision, "CDF tables differ in precision");
  }
  return precision;
}

const CdfTable& TableAt(std::span<const CdfTable> tables, int index) {
  Require(index >= 0 && index < static_cast<int>(tables.size()),
          "table index out of range");
  return tables[index];
}

}  // namespace

std::vector<std::uint8_t> RangeEncode(std::span<const int> symbols,
                                      std::span<const int> table_index,
                                      std::span<const CdfTable> tables) {
  Require(symbols.size() == table_index.size(),
          "one table index per symbol required");
  RangeEncoder enc(CommonPrecision(tables));
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const CdfTable& t = TableAt(tables, table_index[i]);
    const int s = symbols[i];
    if (s < t.min_symbol || s > t.max_symbol) {
      Fail(ErrorCode::kInvalidArgument,
           "symbol " + std::to_string(s) + " outside table range [" +
               std::to_string(t.min_symbol) + ", " +
               std::to_string(t.max_symbol) + "]");
    }
    const int k = s - t.min_symbol;
    enc.Encode(t.cdf[k], t.cdf[k + 1] - t.cdf[k]);
  }
  return enc.Finish();
}

std::vector<int> RangeDecode(std::span<const std::uint8_t> bytes,
                             std::span<const int> table_index,
                             std::span<const CdfTable> tables) {
  if (table_index.empty() && bytes.empty()) return {};
  RangeDecoder dec(bytes, CommonPrecision(tables));
  std::vector<int> out;
  out.reserve(table_index.size());
  for (int ti : table_index) {
    const CdfTable& t = TableAt(tables, ti);
    const std::uint32_t v = dec.Peek();
    // Largest k with cdf[k] <= v.
    const auto it = std::upper_bound(t.cdf.begin(), t.cdf.end(), v);
    const int k = static_cast<int>(it - t.cdf.begin()) - 1;
    if (k < 0 || k >= t.alphabet_size()) {
      Fail(ErrorCode::kFormat, "corrupt range-coded payload");
    }
    dec.Consume(t.cdf[k], t.cdf[k + 1] - t.cdf[k]);
    out.push_back(t.min_symbol + k);
  }
  dec.Finish();
  return out;
}

std::vector<std::uint8_t> RangeEncode(std::span<const int> symbols,
                                      const CdfTable& table) {
  const std::vector<int> index(symbols.size(), 0);
  return RangeEncode(symbols, index, std::span(&table, 1));
}

std::vector<int> RangeDecode(std::span<const std::uint8_t> bytes,
                             const CdfTable& table, std::size_t count) {
  const std::vector<int> index(count, 0);
  return RangeDecode(bytes, index, std::span(&table, 1));
}

double IdealCodeLengthBits(std::span<const int> symbols,
                           std::span<const int> table_index,
                           std::span<const CdfTable> tables) {
  double bits = 0.0;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const CdfTable& t = TableAt(tables, table_index[i]);
    bits -= std::log2(static_cast<double>(t.Frequency(symbols[i])) /
                      static_cast<double>(1u << t.precision));
  }
  return bits;
}

}  // namespace sadn
