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

#ifndef SADN_SADN_H_
#define SADN_SADN_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SADN_API __declspec(dllexport)
#else
#define SADN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sadn_status {
  SADN_OK = 0,
  SADN_ERR_INVALID_ARGUMENT = 1,
  SADN_ERR_FORMAT = 2,
  SADN_ERR_IO = 3,
  SADN_ERR_NUMERIC = 4,
  SADN_ERR_MODEL_MISMATCH = 5,
  SADN_ERR_INTERNAL = 6
} sadn_status;

typedef enum sadn_epi_axis {
  SADN_EPI_HORIZONTAL = 0,
  SADN_EPI_VERTICAL = 1
} sadn_epi_axis;

typedef enum sadn_quality_axis {
  SADN_QUALITY_PSNR = 0,
  SADN_QUALITY_SSIM = 1
} sadn_quality_axis;

typedef struct sadn_model_config {
  int angular;
  int features;
  int latent_channels;
  int color_channels;
  int backbone_stages;
  int entropy_components;
} sadn_model_config;

typedef struct sadn_rd_point {
  double bpp;
  double psnr;
  double ssim;
} sadn_rd_point;

typedef struct sadn_train_stats {
  int64_t step;
  double loss;
  double rate_bpp;
  double mse;
} sadn_train_stats;

typedef struct sadn_lenslet sadn_lenslet;
typedef struct sadn_model sadn_model;
typedef struct sadn_bitstream sadn_bitstream;
typedef struct sadn_rd_curve sadn_rd_curve;
typedef struct sadn_train_config sadn_train_config;

// Message for the last failing call on this thread; never NULL.
SADN_API const char* sadn_last_error(void);
SADN_API const char* sadn_version(void);
SADN_API void sadn_string_free(char* s);

// Lenslet images. Pixels are interleaved H x W x C doubles in [0, 1].
// angular = 0 reads A from the "<path>.meta" sidecar.
SADN_API sadn_status sadn_lenslet_load(const char* path, int angular,
                                       sadn_lenslet** out);
// Writes the image (8-bit, by extension: .png, .ppm, .pgm) and its sidecar.
SADN_API sadn_status sadn_lenslet_save(const sadn_lenslet* li, const char* path);
SADN_API sadn_status sadn_lenslet_from_pixels(const double* pixels, int height,
                                              int width, int channels,
                                              int angular, sadn_lenslet** out);
SADN_API sadn_status sadn_lenslet_info(const sadn_lenslet* li, int* height,
                                       int* width, int* channels, int* angular);
SADN_API sadn_status sadn_lenslet_pixels(const sadn_lenslet* li, double* out,
                                         size_t count);
SADN_API void sadn_lenslet_free(sadn_lenslet* li);

// Sub-aperture image directories: view_UU_VV.png for every (u, v).
SADN_API sadn_status sadn_lenslet_save_sais(const sadn_lenslet* li,
                                            const char* dir);
SADN_API sadn_status sadn_lenslet_load_sais(const char* dir, sadn_lenslet** out);
SADN_API sadn_status sadn_lenslet_crop_angular(const sadn_lenslet* li,
                                               int new_angular,
                                               sadn_lenslet** out);

// Synthetic scenes. Scene text is one "layer key=value ..." line per layer.
SADN_API sadn_status sadn_scene_random(int foreground_layers, int max_disparity,
                                       int spatial_h, int spatial_w,
                                       uint64_t seed, char** scene_text);
SADN_API sadn_status sadn_scene_render(const char* scene_text, int angular,
                                       int spatial_h, int spatial_w,
                                       int channels, uint64_t seed,
                                       sadn_lenslet** out);

// EPIs.
SADN_API sadn_status sadn_epi_save(const sadn_lenslet* li, sadn_epi_axis axis,
                                   int spatial_index, int angular_index,
                                   const char* path);
SADN_API sadn_status sadn_epi_slope(const sadn_lenslet* li, sadn_epi_axis axis,
                                    int spatial_index, int angular_index,
                                    int max_shift, int* slope);
// Mean PSNR over quartile slices through the central views.
SADN_API sadn_status sadn_epi_psnr(const sadn_lenslet* ref,
                                   const sadn_lenslet* rec, double* db);

// Quality metrics on the lenslet image, or averaged over views.
SADN_API sadn_status sadn_psnr(const sadn_lenslet* a, const sadn_lenslet* b,
                               double* db);
SADN_API sadn_status sadn_ssim(const sadn_lenslet* a, const sadn_lenslet* b,
                               double* value);
SADN_API sadn_status sadn_psnr_sai_mean(const sadn_lenslet* a,
                                        const sadn_lenslet* b, double* db);

// Models.
SADN_API sadn_status sadn_model_create(const sadn_model_config* config,
                                       uint64_t seed, sadn_model** out);
SADN_API sadn_status sadn_model_load(const char* checkpoint_path,
                                     sadn_model** out);
SADN_API sadn_status sadn_model_info(const sadn_model* model,
                                     sadn_model_config* config, double* lambda,
                                     int* lambda_index, int64_t* step,
                                     uint64_t* checksum);
SADN_API void sadn_model_free(sadn_model* model);

// Coding. The lambda index stored in the header comes from the model's
// checkpoint.
SADN_API sadn_status sadn_encode(const sadn_model* model, const sadn_lenslet* li,
                                 sadn_bitstream** out);
SADN_API sadn_status sadn_decode(const sadn_model* model,
                                 const sadn_bitstream* bs, sadn_lenslet** out);
SADN_API sadn_status sadn_bitstream_load(const char* path, sadn_bitstream** out);
SADN_API sadn_status sadn_bitstream_save(const sadn_bitstream* bs,
                                         const char* path);
SADN_API sadn_status sadn_bitstream_from_bytes(const uint8_t* bytes, size_t size,
                                               sadn_bitstream** out);
SADN_API sadn_status sadn_bitstream_bytes(const sadn_bitstream* bs,
                                          const uint8_t** data, size_t* size);
// payload_bpp counts payload bits per lenslet pixel; the header is reported
// separately.
SADN_API sadn_status sadn_bitstream_info(const sadn_bitstream* bs, int* height,
                                         int* width, int* channels,
                                         int* angular, int* latent_channels,
                                         size_t* header_bytes,
                                         size_t* payload_bytes,
                                         double* payload_bpp);
SADN_API void sadn_bitstream_free(sadn_bitstream* bs);

// RD curves (CSV "bpp,psnr,ssim") and Bjontegaard deltas.
SADN_API sadn_status sadn_rd_curve_create(sadn_rd_curve** out);
SADN_API sadn_status sadn_rd_curve_load(const char* path, sadn_rd_curve** out);
SADN_API sadn_status sadn_rd_curve_save(const sadn_rd_curve* curve,
                                        const char* path);
SADN_API sadn_status sadn_rd_curve_add(sadn_rd_curve* curve, sadn_rd_point p);
SADN_API sadn_status sadn_rd_curve_size(const sadn_rd_curve* curve,
                                        size_t* size);
SADN_API sadn_status sadn_rd_curve_get(const sadn_rd_curve* curve, size_t index,
                                       sadn_rd_point* p);
SADN_API void sadn_rd_curve_free(sadn_rd_curve* curve);
SADN_API sadn_status sadn_bd_rate(const sadn_rd_curve* anchor,
                                  const sadn_rd_curve* test,
                                  sadn_quality_axis axis, double* percent);
SADN_API sadn_status sadn_bd_psnr(const sadn_rd_curve* anchor,
                                  const sadn_rd_curve* test,
                                  sadn_quality_axis axis, double* delta);
// Real encode/decode of every image; mean payload bpp, PSNR and SSIM.
SADN_API sadn_status sadn_evaluate(const sadn_model* model,
                                   const sadn_lenslet* const* images,
                                   size_t count, sadn_rd_point* out);

// Training. Settings use the key=value names of the config file format.
typedef void (*sadn_train_log_fn)(const sadn_train_stats* stats, void* user);

SADN_API sadn_status sadn_train_config_create(sadn_train_config** out);
SADN_API sadn_status sadn_train_config_load(const char* path,
                                            sadn_train_config** out);
SADN_API sadn_status sadn_train_config_set(sadn_train_config* config,
                                           const char* key, const char* value);
SADN_API void sadn_train_config_free(sadn_train_config* config);
// Writes checkpoints and train_log.csv into the configured out directory.
// final_checkpoint (may be NULL) receives the path of the last checkpoint.
SADN_API sadn_status sadn_train_run(const sadn_train_config* config,
                                    sadn_train_log_fn on_log, void* user,
                                    char** final_checkpoint);

#ifdef __cplusplus
}  // extern "C"
#endif

#endif  // SADN_SADN_H_
