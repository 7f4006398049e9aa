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

#include "checkpoint.hpp"

#include <cstring>

#include "error.hpp"
#include "util.hpp"

namespace sadn {

namespace {

constexpr char kMagic[8] = {'S', 'A', 'D', 'N', 'C', 'K', 'P', 'T'};

void WriteConfig(ByteWriter& w, const SadnConfig& c) {
  for (int v : {c.angular, c.features, c.latent_channels, c.color_channels,
                c.backbone_stages, c.entropy_components}) {
    w.U32(static_cast<std::uint32_t>(v));
  }
}

SadnConfig ReadConfig(ByteReader& r) {
  SadnConfig c;
  c.angular = static_cast<int>(r.U32());
  c.features = static_cast<int>(r.U32());
  c.latent_channels = static_cast<int>(r.U32());
  c.color_channels = static_cast<int>(r.U32());
  c.backbone_stages = static_cast<int>(r.U32());
  c.entropy_components = static_cast<int>(r.U32());
  return c;
}

}  // namespace

std::vector<std::uint8_t> SerializeCheckpoint(const Checkpoint& ckpt) {
  ByteWriter w;
  w.Bytes(std::span(reinterpret_cast<const std::uint8_t*>(kMagic), 8));
  w.U32(kCheckpointVersion);
  WriteConfig(w, ckpt.config);
  w.U64(static_cast<std::uint64_t>(ckpt.step));
  w.F64(ckpt.lambda);
  w.U8(static_cast<std::uint8_t>(ckpt.lambda_index));
  w.F64(ckpt.loss);
  w.F64(ckpt.rate_bpp);
  w.F64(ckpt.mse);
  w.U32(static_cast<std::uint32_t>(ckpt.params.size()));
  for (const auto& [name, t] : ckpt.params) {
    w.Str(name);
    const Shape s = t.shape();
    for (int d : {s.n, s.c, s.h, s.w}) w.U32(static_cast<std::uint32_t>(d));
    for (double v : t.data()) w.F64(v);
  }
  w.U8(ckpt.optimizer ? 1 : 0);
  if (ckpt.optimizer) {
    const AdamState& st = *ckpt.optimizer;
    w.U64(static_cast<std::uint64_t>(st.t));
    for (const auto& [name, t] : ckpt.params) {
      const auto m = st.m.find(name);
      const auto v = st.v.find(name);
      for (std::size_t i = 0; i < t.numel(); ++i) {
        w.F64(m != st.m.end() && i < m->second.size() ? m->second[i] : 0.0);
      }
      for (std::size_t i = 0; i < t.numel(); ++i) {
        w.F64(v != st.v.end() && i < v->second.size() ? v->second[i] : 0.0);
      }
    }
  }
  w.U64(Fnv1a64(w.bytes()));
  return std::move(w.bytes());
}

Checkpoint ParseCheckpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 + 4 + 8 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    Fail(ErrorCode::kFormat, "not a SADN checkpoint");
  }
  const auto body = bytes.first(bytes.size() - 8);
  ByteReader tail(bytes.last(8));
  if (Fnv1a64(body) != tail.U64()) {
    Fail(ErrorCode::kFormat, "checkpoint checksum mismatch");
  }
  ByteReader r(body);
  r.Bytes(8);
  const std::uint32_t version = r.U32();
  if (version != kCheckpointVersion) {
    Fail(ErrorCode::kFormat,
         "unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.config = ReadConfig(r);
  ckpt.step = static_cast<std::int64_t>(r.U64());
  ckpt.lambda = r.F64();
  ckpt.lambda_index = r.U8();
  ckpt.loss = r.F64();
  ckpt.rate_bpp = r.F64();
  ckpt.mse = r.F64();
  const std::uint32_t count = r.U32();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.Str();
    Shape s;
    s.n = static_cast<int>(r.U32());
    s.c = static_cast<int>(r.U32());
    s.h = static_cast<int>(r.U32());
    s.w = static_cast<int>(r.U32());
    if (s.numel() > r.remaining() / 8) {
      Fail(ErrorCode::kFormat, "checkpoint tensor " + name + " truncated");
    }
    std::vector<double> data(s.numel());
    for (double& v : data) v = r.F64();
    ckpt.params[std::move(name)] = Tensor::FromData(s, std::move(data), true);
  }
  if (r.U8() != 0) {
    AdamState st;
    st.t = static_cast<std::int64_t>(r.U64());
    for (const auto& [name, t] : ckpt.params) {
      auto& m = st.m[name];
      auto& v = st.v[name];
      m.resize(t.numel());
      v.resize(t.numel());
      for (double& x : m) x = r.F64();
      for (double& x : v) x = r.F64();
    }
    ckpt.optimizer = std::move(st);
  }
  if (r.remaining() != 0) {
    Fail(ErrorCode::kFormat, "trailing bytes in checkpoint");
  }
  return ckpt;
}

void SaveCheckpoint(const std::string& path, const Checkpoint& ckpt) {
  WriteFileBytes(path, SerializeCheckpoint(ckpt));
}

Checkpoint LoadCheckpoint(const std::string& path) {
  return ParseCheckpoint(ReadFileBytes(path));
}

Checkpoint LoadCheckpoint(const std::string& path, const SadnConfig& expected) {
  Checkpoint ckpt = LoadCheckpoint(path);
  if (!(ckpt.config == expected)) {
    Fail(ErrorCode::kModelMismatch, "checkpoint config (" +
                                        ckpt.config.ToString() +
                                        ") does not match model (" +
                                        expected.ToString() + ")");
  }
  return ckpt;
}

SadnModel ModelFromCheckpoint(const Checkpoint& ckpt) {
  ParamMap copy;
  for (const auto& [name, t] : ckpt.params) {
    copy[name] = Tensor::FromData(
        t.shape(), std::vector<double>(t.data().begin(), t.data().end()), true);
  }
  return SadnModel(ckpt.config, std::move(copy));
}

}  // namespace sadn
