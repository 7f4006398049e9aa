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

#include "sadn_net.hpp"

#include <cmath>

#include "error.hpp"
#include "util.hpp"

namespace sadn {

void SadnConfig::Validate() const {
  Require(angular >= 1 && angular <= 255, "A must be in [1, 255]");
  Require(features >= 1, "N must be >= 1");
  Require(latent_channels >= 1, "M must be >= 1");
  Require(color_channels == 1 || color_channels == 3, "C must be 1 or 3");
  Require(backbone_stages >= 1 && backbone_stages <= 8,
          "backbone stages must be in [1, 8]");
  Require(entropy_components >= 1, "entropy components must be >= 1");
}

std::string SadnConfig::ToString() const {
  return "A=" + std::to_string(angular) + " N=" + std::to_string(features) +
         " M=" + std::to_string(latent_channels) +
         " C=" + std::to_string(color_channels) +
         " stages=" + std::to_string(backbone_stages) +
         " K=" + std::to_string(entropy_components);
}

ConvSpec SfeSpec(int in, int out, int angular) {
  return ConvSpec::Same(in, out, 3, angular);
}

ConvSpec AfeSpec(int in, int out, int angular) {
  return ConvSpec::Valid(in, out, angular, angular);
}

Tensor Sfe(const Tensor& x, const Tensor& weight, const Tensor& bias,
           int angular) {
  return Conv2d(x, weight, bias,
                SfeSpec(x.shape().c, weight.shape().n, angular));
}

Tensor Afe(const Tensor& x, const Tensor& weight, const Tensor& bias,
           int angular) {
  const Shape s = x.shape();
  Require(s.h % angular == 0 && s.w % angular == 0,
          "AFE input " + s.ToString() + " not divisible by A=" +
              std::to_string(angular));
  return Conv2d(x, weight, bias,
                AfeSpec(s.c, weight.shape().n, angular));
}

std::vector<std::pair<int, int>> SfeTapOffsets(int angular) {
  const ConvSpec s = SfeSpec(1, 1, angular);
  std::vector<std::pair<int, int>> taps;
  for (int p = 0; p < s.kernel_h; ++p)
    for (int q = 0; q < s.kernel_w; ++q)
      taps.emplace_back(p * s.dilation_h - s.pad_h, q * s.dilation_w - s.pad_w);
  return taps;
}

Tensor LensletToTensor(const LensletImage& li) {
  return BatchToTensor({li});
}

Tensor BatchToTensor(const std::vector<LensletImage>& batch) {
  Require(!batch.empty(), "empty batch");
  const LensletImage& first = batch.front();
  const Shape s{static_cast<int>(batch.size()), first.channels(),
                first.height(), first.width()};
  std::vector<double> data(s.numel());
  for (int n = 0; n < s.n; ++n) {
    const LensletImage& li = batch[n];
    Require(li.height() == s.h && li.width() == s.w && li.channels() == s.c,
            "batch images differ in shape");
    for (int c = 0; c < s.c; ++c)
      for (int y = 0; y < s.h; ++y)
        for (int x = 0; x < s.w; ++x)
          data[((static_cast<std::size_t>(n) * s.c + c) * s.h + y) * s.w + x] =
              li.at(y, x, c);
  }
  return Tensor::FromData(s, std::move(data));
}

Image TensorToImage(const Tensor& t, int batch_index) {
  const Shape s = t.shape();
  Require(batch_index >= 0 && batch_index < s.n, "batch index out of range");
  Image img(s.h, s.w, s.c);
  for (int c = 0; c < s.c; ++c)
    for (int y = 0; y < s.h; ++y)
      for (int x = 0; x < s.w; ++x) img.at(y, x, c) = t.at(batch_index, c, y, x);
  return img;
}

namespace {

struct LayerDef {
  std::string name;
  ConvSpec spec;
};

ConvSpec AnalysisSpec(const SadnConfig& cfg, int stage) {
  const int in = cfg.features;
  const int out =
      stage == cfg.backbone_stages - 1 ? cfg.latent_channels : cfg.features;
  return ConvSpec::Strided(in, out, 4, 2, 1);
}

std::vector<LayerDef> Layers(const SadnConfig& cfg) {
  const int a = cfg.angular;
  const int n = cfg.features;
  const int c = cfg.color_channels;
  std::vector<LayerDef> layers = {
      {"sfe0", SfeSpec(c, n, a)},
      {"afe0", AfeSpec(c, n, a)},
      {"interact.sfe", SfeSpec(2 * n, n, a)},
      {"interact.afe", AfeSpec(n, n, a)},
      {"interact.conv", ConvSpec::Same(2 * n, n, 3)},
      {"fuse.conv", ConvSpec::Same(n, n, 1)},
      {"fuse.sfe", SfeSpec(2 * n, n, a)},
      {"recon.sfe", SfeSpec(n, n, a)},
      {"recon.afe", AfeSpec(n, n, a)},
      {"recon.out", ConvSpec::Same(2 * n, c, 3)},
  };
  for (int i = 0; i < cfg.backbone_stages; ++i) {
    layers.push_back({"analysis." + std::to_string(i), AnalysisSpec(cfg, i)});
    // synthesis.i undoes analysis.(k-1-i).
    layers.push_back(
        {"synthesis." + std::to_string(i),
         AnalysisSpec(cfg, cfg.backbone_stages - 1 - i).AsTransposed()});
  }
  return layers;
}

std::uint64_t NameHash(const std::string& name) {
  return Fnv1a64(std::span(reinterpret_cast<const std::uint8_t*>(name.data()),
                           name.size()));
}

}  // namespace

std::vector<std::pair<std::string, Shape>> SadnModel::ParameterShapes(
    const SadnConfig& config) {
  config.Validate();
  std::vector<std::pair<std::string, Shape>> out;
  for (const LayerDef& l : Layers(config)) {
    out.emplace_back(l.name + ".w", l.spec.weight_shape());
    out.emplace_back(l.name + ".b", l.spec.bias_shape());
  }
  const Shape es{config.latent_channels, config.entropy_components, 1, 1};
  out.emplace_back("entropy.logits", es);
  out.emplace_back("entropy.means", es);
  out.emplace_back("entropy.log_scales", es);
  return out;
}

SadnModel::SadnModel(const SadnConfig& config, std::uint64_t seed)
    : config_(config) {
  config_.Validate();
  for (const LayerDef& l : Layers(config_)) {
    specs_[l.name] = l.spec;
    const ConvSpec& s = l.spec;
    double fan_in = static_cast<double>(s.in_channels) * s.kernel_h * s.kernel_w;
    if (s.transposed) fan_in /= static_cast<double>(s.stride_h) * s.stride_w;
    const double bound = std::sqrt(3.0 / fan_in);
    const Shape ws = s.weight_shape();
    SplitMix64 rng(HashBits(seed, NameHash(l.name)));
    std::vector<double> w(ws.numel());
    for (double& v : w) v = (2.0 * rng.Unit() - 1.0) * bound;
    params_[l.name + ".w"] = Tensor::FromData(ws, std::move(w), true);
    params_[l.name + ".b"] = Tensor::Zeros(s.bias_shape(), true);
  }
  const auto em = FactorizedEntropyModel::Init(config_.latent_channels,
                                               config_.entropy_components);
  params_["entropy.logits"] = em.logits();
  params_["entropy.means"] = em.means();
  params_["entropy.log_scales"] = em.log_scales();
}

SadnModel::SadnModel(const SadnConfig& config, ParamMap params)
    : config_(config), params_(std::move(params)) {
  config_.Validate();
  for (const LayerDef& l : Layers(config_)) specs_[l.name] = l.spec;
  const auto expected = ParameterShapes(config_);
  if (expected.size() != params_.size()) {
    Fail(ErrorCode::kModelMismatch,
         "parameter count " + std::to_string(params_.size()) +
             " does not match config (" + std::to_string(expected.size()) + ")");
  }
  for (const auto& [name, shape] : expected) {
    const auto it = params_.find(name);
    if (it == params_.end()) {
      Fail(ErrorCode::kModelMismatch, "missing parameter " + name);
    }
    if (!(it->second.shape() == shape)) {
      Fail(ErrorCode::kModelMismatch, "parameter " + name + " has shape " +
                                          it->second.shape().ToString() +
                                          ", config expects " + shape.ToString());
    }
    if (!it->second.requires_grad()) {
      it->second = Tensor::FromData(shape, std::vector<double>(
                                               it->second.data().begin(),
                                               it->second.data().end()),
                                    true);
    }
  }
}

SadnModel SadnModel::Clone() const {
  ParamMap copy;
  for (const auto& [name, t] : params_) {
    copy[name] = Tensor::FromData(
        t.shape(), std::vector<double>(t.data().begin(), t.data().end()), true);
  }
  return SadnModel(config_, std::move(copy));
}

std::vector<Tensor> SadnModel::parameter_list() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const auto& [name, t] : params_) out.push_back(t);
  return out;
}

const Tensor& SadnModel::param(const std::string& name) const {
  const auto it = params_.find(name);
  if (it == params_.end()) Fail(ErrorCode::kInvalidArgument, "no parameter " + name);
  return it->second;
}

void SadnModel::CheckInput(const Shape& s) const {
  Require(s.c == config_.color_channels,
          "input has " + std::to_string(s.c) + " channels, model expects " +
              std::to_string(config_.color_channels));
  const int m = config_.SizeMultiple();
  Require(s.h > 0 && s.w > 0 && s.h % m == 0 && s.w % m == 0,
          "input " + std::to_string(s.h) + "x" + std::to_string(s.w) +
              " must be a multiple of A*2^stages = " + std::to_string(m));
}

Tensor SadnModel::ConvNamed(const Tensor& x, const std::string& name) const {
  const auto it = specs_.find(name);
  if (it == specs_.end()) Fail(ErrorCode::kInvalidArgument, "unknown layer " + name);
  const ConvSpec& spec = it->second;
  const Tensor& w = param(name + ".w");
  const Tensor& b = param(name + ".b");
  return spec.transposed ? Conv2dTransposed(x, w, b, spec)
                         : Conv2d(x, w, b, spec);
}

std::pair<Tensor, Tensor> SadnModel::InitialExtract(const Tensor& li) const {
  const int a = config_.angular;
  Tensor fs0 = Sfe(li, param("sfe0.w"), param("sfe0.b"), a);
  Tensor fa0 = Afe(li, param("afe0.w"), param("afe0.b"), a);
  return {fs0, fa0};
}

std::pair<Tensor, Tensor> SadnModel::Interact(const Tensor& fs0,
                                              const Tensor& fa0) const {
  const int a = config_.angular;
  Require(fs0.shape().h == fa0.shape().h * a && fs0.shape().w == fa0.shape().w * a,
          "angular features must be spatial features downscaled by A");
  const Tensor up = UpsampleNearest(fa0, a);
  const Tensor spatial_in[] = {fs0, up};
  const Tensor fs = Add(fs0, Sfe(ConcatChannels(spatial_in),
                                 param("interact.sfe.w"),
                                 param("interact.sfe.b"), a));
  const Tensor from_spatial =
      Afe(fs0, param("interact.afe.w"), param("interact.afe.b"), a);
  const Tensor angular_in[] = {fa0, from_spatial};
  const Tensor fa = Add(ConvNamed(ConcatChannels(angular_in), "interact.conv"),
                        fa0);
  return {fs, fa};
}

Tensor SadnModel::Fuse(const Tensor& fs, const Tensor& fa) const {
  const int a = config_.angular;
  const Tensor ang =
      ConvNamed(fa, "fuse.conv");
  const Tensor in[] = {fs, UpsampleNearest(ang, a)};
  return Sfe(ConcatChannels(in), param("fuse.sfe.w"), param("fuse.sfe.b"), a);
}

Tensor SadnModel::Analysis(const Tensor& fused) const {
  const int f = 1 << config_.backbone_stages;
  Require(fused.shape().h % f == 0 && fused.shape().w % f == 0,
          "analysis input not divisible by 2^stages");
  Tensor x = fused;
  for (int i = 0; i < config_.backbone_stages; ++i) {
    const std::string name = "analysis." + std::to_string(i);
    x = LeakyRelu(ConvNamed(x, name), kLeakySlope);
  }
  return x;
}

Tensor SadnModel::Synthesis(const Tensor& latent_hat) const {
  Require(latent_hat.shape().c == config_.latent_channels,
          "latent channel count does not match M");
  Tensor x = latent_hat;
  for (int i = 0; i < config_.backbone_stages; ++i) {
    const std::string name = "synthesis." + std::to_string(i);
    x = LeakyRelu(ConvNamed(x, name), kLeakySlope);
  }
  return x;
}

Tensor SadnModel::Reconstruct(const Tensor& coarse, bool eval) const {
  const int a = config_.angular;
  Require(coarse.shape().c == config_.features,
          "coarse features must have N channels");
  const Tensor spatial = LeakyRelu(
      Sfe(coarse, param("recon.sfe.w"), param("recon.sfe.b"), a), kLeakySlope);
  const Tensor angular = LeakyRelu(
      UpsampleNearest(
          Afe(coarse, param("recon.afe.w"), param("recon.afe.b"), a), a),
      kLeakySlope);
  const Tensor in[] = {spatial, angular};
  const Tensor out =
      ConvNamed(ConcatChannels(in), "recon.out");
  return eval ? Clamp(out, 0.0, 1.0) : out;
}

FactorizedEntropyModel SadnModel::entropy_model() const {
  return FactorizedEntropyModel(param("entropy.logits"), param("entropy.means"),
                                param("entropy.log_scales"));
}

Tensor SadnModel::Encode(const Tensor& li) const {
  CheckInput(li.shape());
  const auto [fs0, fa0] = InitialExtract(li);
  const auto [fs, fa] = Interact(fs0, fa0);
  return Analysis(Fuse(fs, fa));
}

Tensor SadnModel::Decode(const Tensor& latent_hat) const {
  return Reconstruct(Synthesis(latent_hat), true);
}

ForwardResult SadnModel::Forward(const Tensor& li, ForwardMode mode,
                                 std::uint64_t noise_seed) const {
  ForwardResult r;
  r.latent = Encode(li);
  switch (mode) {
    case ForwardMode::kTrain:
      r.latent_hat = Quantize(r.latent, QuantMode::kNoise, noise_seed);
      break;
    case ForwardMode::kEval:
      r.latent_hat = Quantize(r.latent, QuantMode::kRound);
      break;
    case ForwardMode::kIdentity:
      r.latent_hat = r.latent;
      break;
  }
  r.rate_bits = Sum(LatentBits(r.latent_hat, entropy_model()));
  r.reconstruction =
      Reconstruct(Synthesis(r.latent_hat), mode == ForwardMode::kEval);
  return r;
}

std::uint64_t SadnModel::Checksum() const {
  ByteWriter w;
  for (int v : {config_.angular, config_.features, config_.latent_channels,
                config_.color_channels, config_.backbone_stages,
                config_.entropy_components}) {
    w.U32(static_cast<std::uint32_t>(v));
  }
  for (const auto& [name, t] : params_) {
    w.Str(name);
    for (double v : t.data()) w.F64(v);
  }
  return Fnv1a64(w.bytes());
}

}  // namespace sadn
