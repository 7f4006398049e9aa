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

#ifndef SADN_CORE_CHECKPOINT_HPP_
#define SADN_CORE_CHECKPOINT_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "optimizer.hpp"
#include "sadn_net.hpp"

namespace sadn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  SadnConfig config;
  ParamMap params;
  std::int64_t step = 0;
  double lambda = 0.0;
  int lambda_index = 0;
  // Statistics of the last logged interval.
  double loss = 0.0;
  double rate_bpp = 0.0;
  double mse = 0.0;
  std::optional<AdamState> optimizer;
};

// Layout: "SADNCKPT", version u32, config (6 x u32), step u64, lambda f64,
// lambda index u8, loss/rate/mse f64, tensors (name, 4 x u32 shape, f64
// data), optional optimizer moments, FNV-1a 64 checksum of all preceding
// bytes. Little-endian throughout.
std::vector<std::uint8_t> SerializeCheckpoint(const Checkpoint& ckpt);
Checkpoint ParseCheckpoint(std::span<const std::uint8_t> bytes);

void SaveCheckpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint LoadCheckpoint(const std::string& path);
// Fails with ErrorCode::kModelMismatch when the stored config differs.
Checkpoint LoadCheckpoint(const std::string& path, const SadnConfig& expected);

SadnModel ModelFromCheckpoint(const Checkpoint& ckpt);

}  // namespace sadn

#endif  // SADN_CORE_CHECKPOINT_HPP_
