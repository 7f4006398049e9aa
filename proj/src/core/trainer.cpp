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

#include "trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "codec.hpp"
#include "error.hpp"
#include "image_io.hpp"
#include "util.hpp"

namespace sadn {

namespace fs = std::filesystem;

void TrainConfig::Validate() const {
  model.Validate();
  Require(lambda > 0 && std::isfinite(lambda), "lambda must be > 0");
  Require(learning_rate >= 0 && std::isfinite(learning_rate),
          "learning rate must be >= 0");
  Require(entropy_lr_scale >= 0 && std::isfinite(entropy_lr_scale),
          "entropy learning-rate scale must be >= 0");
  Require(steps >= 0, "steps must be >= 0");
  Require(batch >= 1, "batch must be >= 1");
  const int m = model.SizeMultiple();
  Require(patch > 0 && patch % m == 0,
          "patch must be a positive multiple of A*2^stages = " + std::to_string(m));
  Require(checkpoint_interval >= 0, "checkpoint interval must be >= 0");
  Require(log_interval >= 1, "log interval must be >= 1");
  Require(lambda_index >= 0 && lambda_index <= 255, "lambda index must fit u8");
  if (data_dir.empty()) {
    Require(synthetic_count >= 1, "synthetic count must be >= 1");
    Require(synthetic_size > 0 && synthetic_size % patch == 0,
            "synthetic size must be a multiple of the patch size");
  }
}

void ApplyTrainSetting(TrainConfig& c, const std::string& key,
                       const std::string& value) {
  auto as_int = [&] { return static_cast<int>(ParseInt(value)); };
  if (key == "lambda") c.lambda = ParseDouble(value);
  else if (key == "lambda_index") c.lambda_index = as_int();
  else if (key == "lr") c.learning_rate = ParseDouble(value);
  else if (key == "entropy_lr_scale") c.entropy_lr_scale = ParseDouble(value);
  else if (key == "steps") c.steps = ParseInt(value);
  else if (key == "batch") c.batch = as_int();
  else if (key == "patch") c.patch = as_int();
  else if (key == "seed") c.seed = ParseU64(value);
  else if (key == "checkpoint_interval") c.checkpoint_interval = ParseInt(value);
  else if (key == "log_interval") c.log_interval = ParseInt(value);
  else if (key == "data") c.data_dir = value;
  else if (key == "synthetic_count") c.synthetic_count = as_int();
  else if (key == "synthetic_size") c.synthetic_size = as_int();
  else if (key == "synthetic_layers") c.synthetic_layers = as_int();
  else if (key == "synthetic_max_disparity") c.synthetic_max_disparity = as_int();
  else if (key == "out") c.out_dir = value;
  else if (key == "resume") c.resume = value;
  else if (key == "angular") c.model.angular = as_int();
  else if (key == "features") c.model.features = as_int();
  else if (key == "latent_channels") c.model.latent_channels = as_int();
  else if (key == "color_channels") c.model.color_channels = as_int();
  else if (key == "stages") c.model.backbone_stages = as_int();
  else if (key == "components") c.model.entropy_components = as_int();
  else Fail(ErrorCode::kInvalidArgument, "unknown training setting '" + key + "'");
}

void ApplyTrainSettings(TrainConfig& config,
                        const std::map<std::string, std::string>& kv) {
  for (const auto& [k, v] : kv) ApplyTrainSetting(config, k, v);
}

TrainConfig LoadTrainConfig(const std::string& path) {
  const auto bytes = ReadFileBytes(path);
  TrainConfig c;
  ApplyTrainSettings(c, ParseKeyValues(std::string_view(
                            reinterpret_cast<const char*>(bytes.data()),
                            bytes.size())));
  return c;
}

Tensor RdLoss(const Tensor& original, const Tensor& reconstruction,
              const Tensor& rate_bpp, double lambda) {
  Require(original.shape() == reconstruction.shape(),
          "RD loss inputs differ in shape: " + original.shape().ToString() +
              " vs " + reconstruction.shape().ToString());
  Require(rate_bpp.shape().numel() == 1, "rate must be a scalar");
  Require(lambda >= 0, "lambda must be >= 0");
  const Tensor mse = Mean(Square(Sub(original, reconstruction)));
  return Add(rate_bpp, Scale(mse, lambda));
}

StepStats TrainStep(SadnModel& model, const Tensor& batch, double lambda,
                    const Adam& adam, AdamState& state,
                    std::uint64_t noise_seed) {
  const Shape s = batch.shape();
  const ForwardResult fr = model.Forward(batch, ForwardMode::kTrain, noise_seed);
  const double pixels = static_cast<double>(s.n) * s.h * s.w;
  const Tensor rate_bpp = Scale(fr.rate_bits, 1.0 / pixels);
  const Tensor mse = Mean(Square(Sub(batch, fr.reconstruction)));
  const Tensor loss = Add(rate_bpp, Scale(mse, lambda));
  StepStats st;
  st.loss = loss.item();
  st.rate_bpp = rate_bpp.item();
  st.mse = mse.item();
  if (!std::isfinite(st.loss)) {
    Fail(ErrorCode::kNumeric,
         "non-finite training loss (rate " + std::to_string(st.rate_bpp) +
             ", mse " + std::to_string(st.mse) + ")");
  }
  for (auto& [name, p] : model.mutable_params()) p.ZeroGrad();
  Backward(loss);
  adam.Step(model.mutable_params(), state);
  st.step = state.t;
  return st;
}

std::vector<LensletImage> SyntheticDataset(int count, int size, int angular,
                                           int channels, int layers,
                                           int max_disparity,
                                           std::uint64_t seed) {
  Require(count >= 0, "count must be >= 0");
  Require(size > 0 && size % angular == 0, "size must be a multiple of A");
  const int spatial = size / angular;
  std::vector<LensletImage> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const std::uint64_t s = HashBits(seed, static_cast<std::uint64_t>(i));
    const SceneSpec scene = RandomScene(layers, max_disparity, spatial, spatial, s);
    out.push_back(SaisToLi(
        GenerateSyntheticLf(scene, angular, spatial, spatial, channels, s)));
  }
  return out;
}

std::vector<LensletImage> LoadDataset(const TrainConfig& config) {
  const int a = config.model.angular;
  std::vector<LensletImage> images;
  if (config.data_dir.empty()) {
    images = SyntheticDataset(config.synthetic_count, config.synthetic_size, a,
                              config.model.color_channels,
                              config.synthetic_layers,
                              config.synthetic_max_disparity, config.seed);
  } else {
    if (!fs::is_directory(config.data_dir)) {
      Fail(ErrorCode::kIo, "data directory not found: " + config.data_dir);
    }
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(config.data_dir)) {
      const std::string ext = e.path().extension().string();
      if (e.is_regular_file() && (ext == ".png" || ext == ".ppm" || ext == ".pgm")) {
        files.push_back(e.path().string());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      LensletImage li = ReadLenslet(f, a);
      if (li.angular() != a) {
        Fail(ErrorCode::kInvalidArgument, f + " has A=" +
                                              std::to_string(li.angular()) +
                                              ", config A=" + std::to_string(a));
      }
      if (li.channels() != config.model.color_channels) {
        Fail(ErrorCode::kInvalidArgument, f + " has the wrong channel count");
      }
      images.push_back(std::move(li));
    }
  }
  std::vector<LensletImage> patches;
  const int patch_mi = config.patch / a;
  for (const auto& li : images) {
    if (li.height() < config.patch || li.width() < config.patch) continue;
    auto p = ExtractPatches(li, patch_mi, patch_mi);
    std::move(p.begin(), p.end(), std::back_inserter(patches));
  }
  if (patches.empty()) Fail(ErrorCode::kInvalidArgument, "dataset is empty");
  return patches;
}

Trainer::Trainer(const TrainConfig& config, std::vector<LensletImage> patches)
    : config_(config),
      patches_(std::move(patches)),
      model_(config.model, config.seed),
      adam_(config.learning_rate, config.entropy_lr_scale) {
  config_.Validate();
  if (static_cast<int>(patches_.size()) < config_.batch) {
    Fail(ErrorCode::kInvalidArgument,
         "dataset has " + std::to_string(patches_.size()) +
             " patches, fewer than one batch of " + std::to_string(config_.batch));
  }
  for (const auto& p : patches_) {
    Require(p.height() == config_.patch && p.width() == config_.patch &&
                p.angular() == config_.model.angular &&
                p.channels() == config_.model.color_channels,
            "patch does not match the training config");
  }
}

Trainer::Trainer(const TrainConfig& config, std::vector<LensletImage> patches,
                 const Checkpoint& resume)
    : Trainer(config, std::move(patches)) {
  if (!(resume.config == config_.model)) {
    Fail(ErrorCode::kModelMismatch, "checkpoint config " +
                                        resume.config.ToString() +
                                        " differs from " +
                                        config_.model.ToString());
  }
  Require(resume.optimizer.has_value(),
          "checkpoint has no optimizer state to resume from");
  model_ = ModelFromCheckpoint(resume);
  state_ = *resume.optimizer;
  step_ = resume.step;
}

std::vector<int> Trainer::BatchIndices(std::int64_t step) const {
  const std::int64_t per_epoch =
      static_cast<std::int64_t>(patches_.size()) / config_.batch;
  const std::int64_t epoch = step / per_epoch;
  const std::int64_t slot = step % per_epoch;
  std::vector<int> perm(patches_.size());
  std::iota(perm.begin(), perm.end(), 0);
  SplitMix64 rng(HashBits(config_.seed ^ 0x5eedull, static_cast<std::uint64_t>(epoch)));
  for (std::size_t i = perm.size(); i > 1; --i) {
    const std::size_t j = rng.Next() % i;
    std::swap(perm[i - 1], perm[j]);
  }
  return {perm.begin() + slot * config_.batch,
          perm.begin() + (slot + 1) * config_.batch};
}

StepStats Trainer::Step() {
  std::vector<LensletImage> batch;
  for (int i : BatchIndices(step_)) batch.push_back(patches_[i]);
  const std::uint64_t noise_seed =
      HashBits(config_.seed, static_cast<std::uint64_t>(step_) + 1);
  StepStats st = TrainStep(model_, BatchToTensor(batch), config_.lambda, adam_,
                           state_, noise_seed);
  ++step_;
  st.step = step_;
  return st;
}

Checkpoint Trainer::MakeCheckpoint(const StepStats& stats) const {
  Checkpoint c;
  c.config = config_.model;
  const SadnModel copy = model_.Clone();
  c.params = copy.params();
  c.step = step_;
  c.lambda = config_.lambda;
  c.lambda_index = config_.lambda_index;
  c.loss = stats.loss;
  c.rate_bpp = stats.rate_bpp;
  c.mse = stats.mse;
  c.optimizer = state_;
  return c;
}

FitResult Fit(const TrainConfig& config,
              const std::function<void(const StepStats&)>& on_log) {
  config.Validate();
  auto patches = LoadDataset(config);
  std::optional<Trainer> trainer;
  if (config.resume.empty()) {
    trainer.emplace(config, std::move(patches));
  } else {
    trainer.emplace(config, std::move(patches),
                    LoadCheckpoint(config.resume, config.model));
  }
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) Fail(ErrorCode::kIo, "cannot create " + config.out_dir + ": " + ec.message());
  const fs::path out(config.out_dir);
  const std::string log_path = (out / "train_log.csv").string();
  const bool fresh = config.resume.empty() || !fs::exists(log_path);
  std::ofstream log(log_path, fresh ? std::ios::trunc : std::ios::app);
  if (!log) Fail(ErrorCode::kIo, "cannot write " + log_path);
  if (fresh) log << "step,loss,rate_bpp,mse\n";

  FitResult result;
  // Running means since the last log line.
  StepStats acc;
  int acc_n = 0;
  StepStats logged;
  auto flush = [&] {
    if (acc_n == 0) return;
    logged = {trainer->step(), acc.loss / acc_n, acc.rate_bpp / acc_n,
              acc.mse / acc_n};
    char line[160];
    std::snprintf(line, sizeof line, "%lld,%.10g,%.10g,%.10g\n",
                  static_cast<long long>(logged.step), logged.loss,
                  logged.rate_bpp, logged.mse);
    log << line;
    log.flush();
    if (on_log) on_log(logged);
    acc = {};
    acc_n = 0;
  };
  while (trainer->step() < config.steps) {
    const StepStats st = trainer->Step();
    acc.loss += st.loss;
    acc.rate_bpp += st.rate_bpp;
    acc.mse += st.mse;
    ++acc_n;
    if (st.step % config.log_interval == 0) flush();
    if (config.checkpoint_interval > 0 &&
        st.step % config.checkpoint_interval == 0 && st.step < config.steps) {
      flush();
      char name[64];
      std::snprintf(name, sizeof name, "ckpt_%06lld.sadnckpt",
                    static_cast<long long>(st.step));
      const std::string path = (out / name).string();
      SaveCheckpoint(path, trainer->MakeCheckpoint(logged));
      result.checkpoints.push_back(path);
    }
  }
  flush();
  const std::string final_path = (out / "final.sadnckpt").string();
  SaveCheckpoint(final_path, trainer->MakeCheckpoint(logged));
  result.checkpoints.push_back(final_path);
  result.last = logged;
  return result;
}

CodecEvaluation EvaluateCodec(const SadnModel& model,
                              const std::vector<LensletImage>& images) {
  Require(!images.empty(), "no images to evaluate");
  CodecEvaluation ev;
  const int m = model.config().latent_channels;
  for (const auto& li : images) {
    const EncodeResult enc = EncodeLf(li, model);
    const auto bytes = SerializeBitstream(enc.bitstream);
    const Bitstream parsed = ParseBitstream(bytes, m);
    const DecodeResult dec = DecodeLf(parsed, model);
    ev.mean.bpp += PayloadBpp(parsed);
    ev.mean.psnr += Psnr(li.pixels(), dec.reconstruction.pixels());
    const bool ssim_ok = li.height() >= 11 && li.width() >= 11;
    ev.mean.ssim += ssim_ok ? Ssim(li.pixels(), dec.reconstruction.pixels()) : 0.0;
    ev.psnr_sai_mean += PsnrSaiMean(li, dec.reconstruction);
    ev.header_bytes += static_cast<double>(parsed.header.SerializedSize());
  }
  const double n = static_cast<double>(images.size());
  ev.mean.bpp /= n;
  ev.mean.psnr /= n;
  ev.mean.ssim /= n;
  ev.psnr_sai_mean /= n;
  ev.header_bytes /= n;
  return ev;
}

}  // namespace sadn
