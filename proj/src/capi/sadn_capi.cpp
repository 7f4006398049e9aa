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

#include "sadn/sadn.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "checkpoint.hpp"
#include "codec.hpp"
#include "error.hpp"
#include "image_io.hpp"
#include "lightfield.hpp"
#include "metrics.hpp"
#include "trainer.hpp"
#include "util.hpp"

struct sadn_lenslet {
  sadn::LensletImage li;
};

struct sadn_model {
  sadn::SadnModel model;
  double lambda = 0.0;
  int lambda_index = 0;
  std::int64_t step = 0;
};

struct sadn_bitstream {
  std::vector<std::uint8_t> bytes;
};

struct sadn_rd_curve {
  sadn::RDCurve curve;
};

struct sadn_train_config {
  sadn::TrainConfig config;
};

namespace {

thread_local std::string g_last_error;

sadn_status StatusOf(sadn::ErrorCode code) {
  switch (code) {
    case sadn::ErrorCode::kInvalidArgument: return SADN_ERR_INVALID_ARGUMENT;
    case sadn::ErrorCode::kFormat: return SADN_ERR_FORMAT;
    case sadn::ErrorCode::kIo: return SADN_ERR_IO;
    case sadn::ErrorCode::kNumeric: return SADN_ERR_NUMERIC;
    case sadn::ErrorCode::kModelMismatch: return SADN_ERR_MODEL_MISMATCH;
  }
  return SADN_ERR_INTERNAL;
}

template <typename F>
sadn_status Guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return SADN_OK;
  } catch (const sadn::Error& e) {
    g_last_error = e.what();
    return StatusOf(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SADN_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SADN_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SADN_ERR_INTERNAL;
  }
}

template <typename T>
const T& Ref(const T* p, const char* name) {
  if (p == nullptr) sadn::Fail(sadn::ErrorCode::kInvalidArgument, std::string("null ") + name);
  return *p;
}

template <typename T>
T& Out(T* p, const char* name) {
  if (p == nullptr) sadn::Fail(sadn::ErrorCode::kInvalidArgument, std::string("null ") + name);
  return *p;
}

std::string Str(const char* s, const char* name) {
  if (s == nullptr) sadn::Fail(sadn::ErrorCode::kInvalidArgument, std::string("null ") + name);
  return s;
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

sadn::EpiAxis AxisOf(sadn_epi_axis axis) {
  switch (axis) {
    case SADN_EPI_HORIZONTAL: return sadn::EpiAxis::kHorizontal;
    case SADN_EPI_VERTICAL: return sadn::EpiAxis::kVertical;
  }
  sadn::Fail(sadn::ErrorCode::kInvalidArgument, "unknown EPI axis");
}

sadn::QualityAxis QualityOf(sadn_quality_axis axis) {
  switch (axis) {
    case SADN_QUALITY_PSNR: return sadn::QualityAxis::kPsnr;
    case SADN_QUALITY_SSIM: return sadn::QualityAxis::kSsim;
  }
  sadn::Fail(sadn::ErrorCode::kInvalidArgument, "unknown quality axis");
}

sadn::SadnConfig ConfigOf(const sadn_model_config& c) {
  sadn::SadnConfig s;
  s.angular = c.angular;
  s.features = c.features;
  s.latent_channels = c.latent_channels;
  s.color_channels = c.color_channels;
  s.backbone_stages = c.backbone_stages;
  s.entropy_components = c.entropy_components;
  return s;
}

}  // namespace

extern "C" {

const char* sadn_last_error(void) { return g_last_error.c_str(); }

const char* sadn_version(void) { return "1.0.0"; }

void sadn_string_free(char* s) { std::free(s); }

sadn_status sadn_lenslet_load(const char* path, int angular, sadn_lenslet** out) {
  return Guard([&] {
    Out(out, "out") = nullptr;
    std::optional<int> a;
    if (angular != 0) a = angular;
    *out = new sadn_lenslet{sadn::ReadLenslet(Str(path, "path"), a)};
  });
}

sadn_status sadn_lenslet_save(const sadn_lenslet* li, const char* path) {
  return Guard([&] { sadn::WriteLenslet(Str(path, "path"), Ref(li, "li").li); });
}

sadn_status sadn_lenslet_from_pixels(const double* pixels, int height, int width,
                                     int channels, int angular,
                                     sadn_lenslet** out) {
  return Guard([&] {
    Out(out, "out") = nullptr;
    sadn::Require(pixels != nullptr, "null pixels");
    sadn::Require(height > 0 && width > 0 && channels > 0, "invalid image size");
    const std::size_t n = static_cast<std::size_t>(height) * width * channels;
    sadn::Image img(height, width, channels, std::vector<double>(pixels, pixels + n));
    *out = new sadn_lenslet{sadn::LensletImage(std::move(img), angular)};
  });
}

sadn_status sadn_lenslet_info(const sadn_lenslet* li, int* height, int* width,
                              int* channels, int* angular) {
  return Guard([&] {
    const auto& l = Ref(li, "li").li;
    if (height) *height = l.height();
    if (width) *width = l.width();
    if (channels) *channels = l.channels();
    if (angular) *angular = l.angular();
  });
}

sadn_status sadn_lenslet_pixels(const sadn_lenslet* li, double* out,
                                size_t count) {
  return Guard([&] {
    const auto data = Ref(li, "li").li.pixels().data();
    sadn::Require(out != nullptr, "null out");
    sadn::Require(count == data.size(), "count must equal H*W*C = " +
                                            std::to_string(data.size()));
    std::memcpy(out, data.data(), count * sizeof(double));
  });
}

void sadn_lenslet_free(sadn_lenslet* li) { delete li; }

sadn_status sadn_lenslet_save_sais(const sadn_lenslet* li, const char* dir) {
  return Guard([&] {
    sadn::WriteSaiDirectory(Str(dir, "dir"), sadn::LiToSais(Ref(li, "li").li));
  });
}

sadn_status sadn_lenslet_load_sais(const char* dir, sadn_lenslet** out) {
  return Guard([&] {
    Out(out, "out") = nullptr;
    *out = new sadn_lenslet{sadn::SaisToLi(sadn::ReadSaiDirectory(Str(dir, "dir")))};
  });
}

sadn_status sadn_lenslet_crop_angular(const sadn_lenslet* li, int new_angular,
                                      sadn_lenslet** out) {
  return Guard([&] {
    Out(out, "out") = nullptr;
    const auto stack = sadn::LiToSais(Ref(li, "li").li);
    *out = new sadn_lenslet{sadn::SaisToLi(sadn::CropCentral(stack, new_angular))};
  });
}

sadn_status sadn_scene_random(int foreground_layers, int max_disparity,
                              int spatial_h, int spatial_w, uint64_t seed,
                              char** scene_text) {
  return Guard([&] {
    Out(scene_text, "scene_text") = nullptr;
    const auto scene = sadn::RandomScene(foreground_layers, max_disparity,
                                         spatial_h, spatial_w, seed);
    *scene_text = CopyString(sadn::FormatSceneSpec(scene));
  });
}

sadn_status sadn_scene_render(const char* scene_text, int angular, int spatial_h,
                              int spatial_w, int channels, uint64_t seed,
                              sadn_lenslet** out) {
  return Guard([&] {
    Out(out, "out") = nullptr;
    const auto scene = sadn::ParseSceneSpec(Str(scene_text, "scene_text"));
    *out = new sadn_lenslet{sadn::SaisToLi(sadn::GenerateSyntheticLf(
        scene, angular, spatial_h, spatial_w, channels, seed))};
  });
}

sadn_status sadn_epi_save(const sadn_lenslet* li, sadn_epi_axis axis,
                          int spatial_index, int angular_index,
                          const char* path) {
  return Guard([&] {
    const auto epi = sadn::ExtractEpi(sadn::LiToSais(Ref(li, "li").li),
                                      AxisOf(axis), spatial_index, angular_index);
    sadn::WriteImage(Str(path, "path"), epi.slice);
  });
}

sadn_status sadn_epi_slope(const sadn_lenslet* li, sadn_epi_axis axis,
                           int spatial_index, int angular_index, int max_shift,
                           int* slope) {
  return Guard([&] {
    const auto epi = sadn::ExtractEpi(sadn::LiToSais(Ref(li, "li").li),
                                      AxisOf(axis), spatial_index, angular_index);
    Out(slope, "slope") = sadn::EstimateEpiSlope(epi, max_shift);
  });
}

sadn_status sadn_epi_psnr(const sadn_lenslet* ref, const sadn_lenslet* rec,
                          double* db) {
  return Guard([&] {
    const auto a = sadn::LiToSais(Ref(ref, "ref").li);
    const auto b = sadn::LiToSais(Ref(rec, "rec").li);
    const auto plan = sadn::DefaultEpiPlan(a.angular(), a.spatial_height(),
                                           a.spatial_width());
    Out(db, "db") = sadn::EpiPsnr(a, b, plan);
  });
}

sadn_status sadn_psnr(const sadn_lenslet* a, const sadn_lenslet* b, double* db) {
  return Guard([&] {
    Out(db, "db") = sadn::Psnr(Ref(a, "a").li.pixels(), Ref(b, "b").li.pixels());
  });
}

sadn_status sadn_ssim(const sadn_lenslet* a, const sadn_lenslet* b,
                      double* value) {
  return Guard([&] {
    Out(value, "value") =
        sadn::Ssim(Ref(a, "a").li.pixels(), Ref(b, "b").li.pixels());
  });
}

sadn_status sadn_psnr_sai_mean(const sadn_lenslet* a, const sadn_lenslet* b,
                               double* db) {
  return Guard([&] {
    Out(db, "db") = sadn::PsnrSaiMean(Ref(a, "a").li, Ref(b, "b").li);
  });
}

sadn_status sadn_model_create(const sadn_model_config* config, uint64_t seed,
                              sadn_model** out) {
  return Guard([&] {
    Out(out, "out") = nullptr;
    *out = new sadn_model{sadn::SadnModel(ConfigOf(Ref(config, "config")), seed)};
  });
}

sadn_status sadn_model_load(const char* checkpoint_path, sadn_model** out) {
  return Guard([&] {
    Out(out, "out") = nullptr;
    const auto ckpt = sadn::LoadCheckpoint(Str(checkpoint_path, "checkpoint_path"));
    *out = new sadn_model{sadn::ModelFromCheckpoint(ckpt), ckpt.lambda,
                          ckpt.lambda_index, ckpt.step};
  });
}

sadn_status sadn_model_info(const sadn_model* model, sadn_model_config* config,
                            double* lambda, int* lambda_index, int64_t* step,
                            uint64_t* checksum) {
  return Guard([&] {
    const auto& m = Ref(model, "model");
    if (config) {
      const auto& c = m.model.config();
      *config = {c.angular, c.features, c.latent_channels, c.color_channels,
                 c.backbone_stages, c.entropy_components};
    }
    if (lambda) *lambda = m.lambda;
    if (lambda_index) *lambda_index = m.lambda_index;
    if (step) *step = m.step;
    if (checksum) *checksum = m.model.Checksum();
  });
}

void sadn_model_free(sadn_model* model) { delete model; }

sadn_status sadn_encode(const sadn_model* model, const sadn_lenslet* li,
                        sadn_bitstream** out) {
  return Guard([&] {
    Out(out, "out") = nullptr;
    const auto& m = Ref(model, "model");
    const auto enc = sadn::EncodeLf(Ref(li, "li").li, m.model, m.lambda_index);
    *out = new sadn_bitstream{sadn::SerializeBitstream(enc.bitstream)};
  });
}

sadn_status sadn_decode(const sadn_model* model, const sadn_bitstream* bs,
                        sadn_lenslet** out) {
  return Guard([&] {
    Out(out, "out") = nullptr;
    const auto& m = Ref(model, "model");
    const auto parsed = sadn::ParseBitstream(Ref(bs, "bs").bytes,
                                             m.model.config().latent_channels);
    *out = new sadn_lenslet{sadn::DecodeLf(parsed, m.model).reconstruction};
  });
}

namespace {

// Full parsing needs M from the model; this only rejects foreign data early.
void CheckMagic(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 5 || std::memcmp(bytes.data(), "SADN", 4) != 0) {
    sadn::Fail(sadn::ErrorCode::kFormat, "not a SADN bitstream (bad magic)");
  }
  if (bytes[4] != sadn::kBitstreamVersion) {
    sadn::Fail(sadn::ErrorCode::kFormat, "unsupported bitstream version " +
                                             std::to_string(bytes[4]));
  }
}

}  // namespace

sadn_status sadn_bitstream_load(const char* path, sadn_bitstream** out) {
  return Guard([&] {
    Out(out, "out") = nullptr;
    auto bytes = sadn::ReadFileBytes(Str(path, "path"));
    CheckMagic(bytes);
    *out = new sadn_bitstream{std::move(bytes)};
  });
}

sadn_status sadn_bitstream_save(const sadn_bitstream* bs, const char* path) {
  return Guard([&] { sadn::WriteFileBytes(Str(path, "path"), Ref(bs, "bs").bytes); });
}

sadn_status sadn_bitstream_from_bytes(const uint8_t* bytes, size_t size,
                                      sadn_bitstream** out) {
  return Guard([&] {
    Out(out, "out") = nullptr;
    sadn::Require(bytes != nullptr || size == 0, "null bytes");
    std::vector<std::uint8_t> copy(bytes, bytes + size);
    CheckMagic(copy);
    *out = new sadn_bitstream{std::move(copy)};
  });
}

sadn_status sadn_bitstream_bytes(const sadn_bitstream* bs, const uint8_t** data,
                                 size_t* size) {
  return Guard([&] {
    const auto& b = Ref(bs, "bs").bytes;
    Out(data, "data") = b.data();
    Out(size, "size") = b.size();
  });
}

sadn_status sadn_bitstream_info(const sadn_bitstream* bs, int* height, int* width,
                                int* channels, int* angular,
                                int* latent_channels, size_t* header_bytes,
                                size_t* payload_bytes, double* payload_bpp) {
  return Guard([&] {
    const auto parsed = sadn::ParseBitstream(Ref(bs, "bs").bytes);
    const auto& h = parsed.header;
    if (height) *height = static_cast<int>(h.height);
    if (width) *width = static_cast<int>(h.width);
    if (channels) *channels = h.channels;
    if (angular) *angular = h.angular;
    if (latent_channels) *latent_channels = static_cast<int>(h.symbol_ranges.size());
    if (header_bytes) *header_bytes = h.SerializedSize();
    if (payload_bytes) *payload_bytes = parsed.payload.size();
    if (payload_bpp) *payload_bpp = sadn::PayloadBpp(parsed);
  });
}

void sadn_bitstream_free(sadn_bitstream* bs) { delete bs; }

sadn_status sadn_rd_curve_create(sadn_rd_curve** out) {
  return Guard([&] { Out(out, "out") = new sadn_rd_curve{}; });
}

sadn_status sadn_rd_curve_load(const char* path, sadn_rd_curve** out) {
  return Guard([&] {
    Out(out, "out") = nullptr;
    *out = new sadn_rd_curve{sadn::ReadRdCurve(Str(path, "path"))};
  });
}

sadn_status sadn_rd_curve_save(const sadn_rd_curve* curve, const char* path) {
  return Guard([&] { sadn::WriteRdCurve(Str(path, "path"), Ref(curve, "curve").curve); });
}

sadn_status sadn_rd_curve_add(sadn_rd_curve* curve, sadn_rd_point p) {
  return Guard([&] { Out(curve, "curve").curve.push_back({p.bpp, p.psnr, p.ssim}); });
}

sadn_status sadn_rd_curve_size(const sadn_rd_curve* curve, size_t* size) {
  return Guard([&] { Out(size, "size") = Ref(curve, "curve").curve.size(); });
}

sadn_status sadn_rd_curve_get(const sadn_rd_curve* curve, size_t index,
                              sadn_rd_point* p) {
  return Guard([&] {
    const auto& c = Ref(curve, "curve").curve;
    sadn::Require(index < c.size(), "RD point index out of range");
    Out(p, "p") = {c[index].bpp, c[index].psnr, c[index].ssim};
  });
}

void sadn_rd_curve_free(sadn_rd_curve* curve) { delete curve; }

sadn_status sadn_bd_rate(const sadn_rd_curve* anchor, const sadn_rd_curve* test,
                         sadn_quality_axis axis, double* percent) {
  return Guard([&] {
    Out(percent, "percent") = sadn::BdRate(Ref(anchor, "anchor").curve,
                                           Ref(test, "test").curve, QualityOf(axis));
  });
}

sadn_status sadn_bd_psnr(const sadn_rd_curve* anchor, const sadn_rd_curve* test,
                         sadn_quality_axis axis, double* delta) {
  return Guard([&] {
    Out(delta, "delta") = sadn::BdPsnr(Ref(anchor, "anchor").curve,
                                       Ref(test, "test").curve, QualityOf(axis));
  });
}

sadn_status sadn_evaluate(const sadn_model* model,
                          const sadn_lenslet* const* images, size_t count,
                          sadn_rd_point* out) {
  return Guard([&] {
    sadn::Require(images != nullptr && count > 0, "no images");
    std::vector<sadn::LensletImage> list;
    for (size_t i = 0; i < count; ++i) list.push_back(Ref(images[i], "image").li);
    const auto ev = sadn::EvaluateCodec(Ref(model, "model").model, list);
    Out(out, "out") = {ev.mean.bpp, ev.mean.psnr, ev.mean.ssim};
  });
}

sadn_status sadn_train_config_create(sadn_train_config** out) {
  return Guard([&] { Out(out, "out") = new sadn_train_config{}; });
}

sadn_status sadn_train_config_load(const char* path, sadn_train_config** out) {
  return Guard([&] {
    Out(out, "out") = nullptr;
    *out = new sadn_train_config{sadn::LoadTrainConfig(Str(path, "path"))};
  });
}

sadn_status sadn_train_config_set(sadn_train_config* config, const char* key,
                                  const char* value) {
  return Guard([&] {
    sadn::ApplyTrainSetting(Out(config, "config").config, Str(key, "key"),
                            Str(value, "value"));
  });
}

void sadn_train_config_free(sadn_train_config* config) { delete config; }

sadn_status sadn_train_run(const sadn_train_config* config,
                           sadn_train_log_fn on_log, void* user,
                           char** final_checkpoint) {
  return Guard([&] {
    if (final_checkpoint) *final_checkpoint = nullptr;
    std::function<void(const sadn::StepStats&)> cb;
    if (on_log) {
      cb = [on_log, user](const sadn::StepStats& s) {
        const sadn_train_stats st{s.step, s.loss, s.rate_bpp, s.mse};
        on_log(&st, user);
      };
    }
    const auto result = sadn::Fit(Ref(config, "config").config, cb);
    if (final_checkpoint) *final_checkpoint = CopyString(result.checkpoints.back());
  });
}

}  // extern "C"
