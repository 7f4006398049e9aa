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

#ifndef SADN_CORE_SADN_NET_HPP_
#define SADN_CORE_SADN_NET_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "entropy.hpp"
#include "lightfield.hpp"
#include "tensor.hpp"

namespace sadn {

struct SadnConfig {
  int angular = 4;           // A: micro-image side
  int features = 16;         // N
  int latent_channels = 32;  // M
  int color_channels = 3;    // C
  int backbone_stages = 2;   // stride-2 analysis stages
  int entropy_components = 3;

  void Validate() const;
  // Inputs must be H x W with H, W multiples of A * 2^stages.
  int SizeMultiple() const { return angular << backbone_stages; }
  bool operator==(const SadnConfig&) const = default;
  std::string ToString() const;
};

inline constexpr double kLeakySlope = 0.2;

// Ordered by name so that iteration (and therefore serialization and the
// model checksum) is deterministic.
using ParamMap = std::map<std::string, Tensor>;

// Spatial feature extractor: 3x3 conv, dilation A, stride 1, same padding.
// Every tap lands on the same angular coordinate of a neighbouring
// micro-image.
ConvSpec SfeSpec(int in, int out, int angular);
// Angular feature extractor: A x A conv, stride A, no padding. One output
// per micro-image.
ConvSpec AfeSpec(int in, int out, int angular);

Tensor Sfe(const Tensor& x, const Tensor& weight, const Tensor& bias,
           int angular);
Tensor Afe(const Tensor& x, const Tensor& weight, const Tensor& bias,
           int angular);

// (row, col) offsets of the SFE taps relative to the output pixel.
std::vector<std::pair<int, int>> SfeTapOffsets(int angular);

// Lenslet image as a (1, C, H, W) tensor and back.
Tensor LensletToTensor(const LensletImage& li);
Tensor BatchToTensor(const std::vector<LensletImage>& batch);
Image TensorToImage(const Tensor& t, int batch_index = 0);

enum class ForwardMode {
  kTrain,     // additive uniform noise, unclamped output
  kEval,      // rounding, output clamped to [0, 1]
  kIdentity,  // no quantization, unclamped; for gradient checks
};

struct ForwardResult {
  Tensor reconstruction;  // (n, C, H, W)
  Tensor latent;          // y before quantization
  Tensor latent_hat;      // y after quantization
  Tensor rate_bits;       // scalar, estimated bits for the whole batch
};

class SadnModel {
 public:
  // Fan-in scaled uniform weights, zero biases.
  SadnModel(const SadnConfig& config, std::uint64_t seed);
  // Adopts the given parameters; names and shapes must match the config.
  SadnModel(const SadnConfig& config, ParamMap params);

  // Copies share parameter storage; Clone() does not.
  SadnModel Clone() const;

  const SadnConfig& config() const { return config_; }
  const ParamMap& params() const { return params_; }
  ParamMap& mutable_params() { return params_; }
  std::vector<Tensor> parameter_list() const;
  const Tensor& param(const std::string& name) const;

  // Expected (name, shape) of every parameter.
  static std::vector<std::pair<std::string, Shape>> ParameterShapes(
      const SadnConfig& config);

  void CheckInput(const Shape& s) const;

  // F_S0 = SFE(L), F_A0 = AFE(L).
  std::pair<Tensor, Tensor> InitialExtract(const Tensor& li) const;
  // F_S = F_S0 + SFE([F_S0, up(F_A0)]);  F_A = Conv([F_A0, AFE(F_S0)]) + F_A0.
  std::pair<Tensor, Tensor> Interact(const Tensor& fs0, const Tensor& fa0) const;
  // F_f = SFE([F_S, up(Conv1x1(F_A))]).
  Tensor Fuse(const Tensor& fs, const Tensor& fa) const;
  Tensor Analysis(const Tensor& fused) const;
  Tensor Synthesis(const Tensor& latent_hat) const;
  Tensor Reconstruct(const Tensor& coarse, bool eval) const;
  FactorizedEntropyModel entropy_model() const;

  ForwardResult Forward(const Tensor& li, ForwardMode mode,
                        std::uint64_t noise_seed = 0) const;
  // Analysis transform only: y = analysis(fuse(interact(extract(L)))).
  Tensor Encode(const Tensor& li) const;
  // Reconstruction from quantized latents, clamped to [0, 1].
  Tensor Decode(const Tensor& latent_hat) const;

  // FNV-1a over config and parameter bytes.
  std::uint64_t Checksum() const;

 private:
  Tensor ConvNamed(const Tensor& x, const std::string& name) const;

  SadnConfig config_;
  ParamMap params_;
  std::map<std::string, ConvSpec> specs_;
};

}  // namespace sadn

#endif  // SADN_CORE_SADN_NET_HPP_
