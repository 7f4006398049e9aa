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

#ifndef SADN_CORE_TRAINER_HPP_
#define SADN_CORE_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "checkpoint.hpp"
#include "lightfield.hpp"
#include "metrics.hpp"
#include "optimizer.hpp"
#include "sadn_net.hpp"

namespace sadn {

inline constexpr double kDefaultLambdas[] = {0.01, 0.05, 0.25, 1.0};

struct TrainConfig {
  SadnConfig model;
  double lambda = 0.01;
  int lambda_index = 0;
  double learning_rate = 1e-3;
  // Multiplier on the learning rate of the entropy-model parameters.
  double entropy_lr_scale = 10.0;
  std::int64_t steps = 1000;
  int batch = 1;
  int patch = 64;  // lenslet pixels per side
  std::uint64_t seed = 1;
  std::int64_t checkpoint_interval = 0;  // 0: final checkpoint only
  std::int64_t log_interval = 10;
  // Dataset: lenslet images in data_dir, or synthetic scenes when empty.
  std::string data_dir;
  int synthetic_count = 8;
  int synthetic_size = 64;  // lenslet pixels per side
  int synthetic_layers = 2;
  int synthetic_max_disparity = 1;
  std::string out_dir = ".";
  std::string resume;  // checkpoint path

  void Validate() const;
};

// Keys: lambda, lambda_index, lr, entropy_lr_scale, steps, batch, patch, seed,
// checkpoint_interval, log_interval, data, synthetic_count, synthetic_size,
// synthetic_layers, synthetic_max_disparity, out, resume, angular, features,
// latent_channels, color_channels, stages, components. Unknown keys fail.
void ApplyTrainSetting(TrainConfig& config, const std::string& key,
                       const std::string& value);
void ApplyTrainSettings(TrainConfig& config,
                        const std::map<std::string, std::string>& kv);
TrainConfig LoadTrainConfig(const std::string& path);

// rate_bpp + lambda * mean((a - b)^2).
Tensor RdLoss(const Tensor& original, const Tensor& reconstruction,
              const Tensor& rate_bpp, double lambda);

struct StepStats {
  std::int64_t step = 0;  // steps completed, including this one
  double loss = 0.0;
  double rate_bpp = 0.0;
  double mse = 0.0;
};

// One noisy-quantization forward pass, backward pass and Adam update.
// Fails with ErrorCode::kNumeric on a non-finite loss.
StepStats TrainStep(SadnModel& model, const Tensor& batch, double lambda,
                    const Adam& adam, AdamState& state,
                    std::uint64_t noise_seed);

// Synthetic lenslet images of `size` x `size` pixels.
std::vector<LensletImage> SyntheticDataset(int count, int size, int angular,
                                           int channels, int layers,
                                           int max_disparity,
                                           std::uint64_t seed);
// Non-overlapping patch x patch crops of every image in data_dir (sorted by
// file name). Images need an angular sidecar or must match `angular`.
std::vector<LensletImage> LoadDataset(const TrainConfig& config);

class Trainer {
 public:
  Trainer(const TrainConfig& config, std::vector<LensletImage> patches);
  // Continues from a checkpoint with optimizer state.
  Trainer(const TrainConfig& config, std::vector<LensletImage> patches,
          const Checkpoint& resume);

  StepStats Step();
  std::int64_t step() const { return step_; }
  const SadnModel& model() const { return model_; }
  const AdamState& optimizer_state() const { return state_; }
  // Snapshot carrying the given loss statistics.
  Checkpoint MakeCheckpoint(const StepStats& stats) const;

  // Patch indices used at a given step; a fresh seeded permutation per
  // epoch, last partial batch dropped.
  std::vector<int> BatchIndices(std::int64_t step) const;

 private:
  TrainConfig config_;
  std::vector<LensletImage> patches_;
  SadnModel model_;
  Adam adam_;
  AdamState state_;
  std::int64_t step_ = 0;
};

struct FitResult {
  std::vector<std::string> checkpoints;
  StepStats last;
};

// Runs config.steps steps, writing ckpt_<step>.sadnckpt every
// checkpoint_interval steps, final.sadnckpt at the end and train_log.csv
// (step,loss,rate_bpp,mse) into out_dir.
FitResult Fit(const TrainConfig& config,
              const std::function<void(const StepStats&)>& on_log = {});

struct CodecEvaluation {
  RDPoint mean;  // payload bpp, LI PSNR, LI SSIM averaged over images
  double psnr_sai_mean = 0.0;
  double header_bytes = 0.0;  // per image
};

// Real encode and decode of every image.
CodecEvaluation EvaluateCodec(const SadnModel& model,
                              const std::vector<LensletImage>& images);

}  // namespace sadn

#endif  // SADN_CORE_TRAINER_HPP_
