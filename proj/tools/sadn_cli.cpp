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

// Command-line front end. Uses only the public C API.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sadn/sadn.h"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct Failure {
  sadn_status status;
  std::string message;
};

void Check(sadn_status s, const std::string& what) {
  if (s != SADN_OK) throw Failure{s, what + ": " + sadn_last_error()};
}

int ExitCodeOf(sadn_status s) {
  switch (s) {
    case SADN_ERR_INVALID_ARGUMENT: return kExitUsage;
    case SADN_ERR_NUMERIC: return kExitNumeric;
    default: return kExitData;
  }
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Lenslet = std::unique_ptr<sadn_lenslet, Deleter<sadn_lenslet, sadn_lenslet_free>>;
using Model = std::unique_ptr<sadn_model, Deleter<sadn_model, sadn_model_free>>;
using Stream =
    std::unique_ptr<sadn_bitstream, Deleter<sadn_bitstream, sadn_bitstream_free>>;
using Curve = std::unique_ptr<sadn_rd_curve, Deleter<sadn_rd_curve, sadn_rd_curve_free>>;
using TrainCfg =
    std::unique_ptr<sadn_train_config, Deleter<sadn_train_config, sadn_train_config_free>>;
using CString = std::unique_ptr<char, Deleter<char, sadn_string_free>>;

Lenslet LoadLenslet(const std::string& path, int angular) {
  sadn_lenslet* li = nullptr;
  Check(sadn_lenslet_load(path.c_str(), angular, &li), "reading " + path);
  return Lenslet(li);
}

Model LoadModel(const std::string& path) {
  sadn_model* m = nullptr;
  Check(sadn_model_load(path.c_str(), &m), "loading model " + path);
  return Model(m);
}

std::string ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{SADN_ERR_IO, "cannot read " + path};
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Failure{SADN_ERR_IO, "cannot write " + path};
}

std::string Row(double bpp, double psnr, double ssim) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.6f,%.4f,%.6f", bpp, psnr, ssim);
  return buf;
}

struct Globals {
  std::uint64_t seed = 1;
  bool seed_set = false;
  int verbose = 0;
  std::string config;
};

// --- verbs ------------------------------------------------------------------

struct ConvertArgs {
  std::string to, in, out;
  int angular = 0;
};

void RunConvert(const ConvertArgs& a) {
  if (a.to == "sais") {
    Lenslet li = LoadLenslet(a.in, a.angular);
    Check(sadn_lenslet_save_sais(li.get(), a.out.c_str()), "writing " + a.out);
  } else {
    sadn_lenslet* li = nullptr;
    Check(sadn_lenslet_load_sais(a.in.c_str(), &li), "reading " + a.in);
    Lenslet owned(li);
    Check(sadn_lenslet_save(li, a.out.c_str()), "writing " + a.out);
  }
}

struct SynthArgs {
  std::string scene, scene_out, out, sais;
  int angular = 4, size = 16, channels = 3, layers = 2, max_disparity = 1;
};

void RunSynth(const SynthArgs& a, const Globals& g) {
  std::string text;
  if (!a.scene.empty()) {
    text = ReadText(a.scene);
  } else {
    char* s = nullptr;
    Check(sadn_scene_random(a.layers, a.max_disparity, a.size, a.size, g.seed, &s),
          "generating scene");
    text = CString(s).get();
  }
  sadn_lenslet* li = nullptr;
  Check(sadn_scene_render(text.c_str(), a.angular, a.size, a.size, a.channels,
                          g.seed, &li),
        "rendering scene");
  Lenslet owned(li);
  if (!a.out.empty()) Check(sadn_lenslet_save(li, a.out.c_str()), "writing " + a.out);
  if (!a.sais.empty()) Check(sadn_lenslet_save_sais(li, a.sais.c_str()), "writing " + a.sais);
  if (!a.scene_out.empty()) WriteText(a.scene_out, text);
}

struct TrainArgs {
  std::map<std::string, std::string> flags;
};

void TrainLog(const sadn_train_stats* s, void* user) {
  if (*static_cast<int*>(user) > 0) {
    std::fprintf(stderr, "%lld,%.6g,%.6g,%.6g\n", static_cast<long long>(s->step),
                 s->loss, s->rate_bpp, s->mse);
  }
}

void RunTrain(const TrainArgs& a, Globals g) {
  sadn_train_config* c = nullptr;
  if (g.config.empty()) {
    Check(sadn_train_config_create(&c), "train config");
  } else {
    Check(sadn_train_config_load(g.config.c_str(), &c), "reading " + g.config);
  }
  TrainCfg owned(c);
  for (const auto& [k, v] : a.flags) {
    Check(sadn_train_config_set(c, k.c_str(), v.c_str()), "setting " + k);
  }
  if (g.seed_set) {
    Check(sadn_train_config_set(c, "seed", std::to_string(g.seed).c_str()), "seed");
  }
  char* final_path = nullptr;
  Check(sadn_train_run(c, TrainLog, &g.verbose, &final_path), "training");
  std::printf("%s\n", CString(final_path).get());
}

struct EncodeArgs {
  std::string model, in, out;
  int angular = 0;
};

void RunEncode(const EncodeArgs& a) {
  Model m = LoadModel(a.model);
  Lenslet li = LoadLenslet(a.in, a.angular);
  sadn_bitstream* bs = nullptr;
  Check(sadn_encode(m.get(), li.get(), &bs), "encoding " + a.in);
  Stream owned(bs);
  Check(sadn_bitstream_save(bs, a.out.c_str()), "writing " + a.out);
}

struct DecodeArgs {
  std::string model, in, out;
};

void RunDecode(const DecodeArgs& a) {
  Model m = LoadModel(a.model);
  sadn_bitstream* bs = nullptr;
  Check(sadn_bitstream_load(a.in.c_str(), &bs), "reading " + a.in);
  Stream owned(bs);
  sadn_lenslet* li = nullptr;
  Check(sadn_decode(m.get(), bs, &li), "decoding " + a.in);
  Lenslet rec(li);
  Check(sadn_lenslet_save(li, a.out.c_str()), "writing " + a.out);
}

struct EvalArgs {
  std::string ref, rec, bitstream;
  int angular = 0;
  bool sai_mean = false;
  bool header = false;
};

void RunEval(const EvalArgs& a) {
  Lenslet ref = LoadLenslet(a.ref, a.angular);
  Lenslet rec = LoadLenslet(a.rec, a.angular);
  double psnr = 0, ssim = 0, bpp = 0;
  if (a.sai_mean) {
    Check(sadn_psnr_sai_mean(ref.get(), rec.get(), &psnr), "PSNR");
  } else {
    Check(sadn_psnr(ref.get(), rec.get(), &psnr), "PSNR");
  }
  Check(sadn_ssim(ref.get(), rec.get(), &ssim), "SSIM");
  if (!a.bitstream.empty()) {
    sadn_bitstream* bs = nullptr;
    Check(sadn_bitstream_load(a.bitstream.c_str(), &bs), "reading " + a.bitstream);
    Stream owned(bs);
    Check(sadn_bitstream_info(bs, nullptr, nullptr, nullptr, nullptr, nullptr,
                              nullptr, nullptr, &bpp),
          "parsing " + a.bitstream);
  }
  if (a.header) std::printf("bpp,psnr,ssim\n");
  std::printf("%s\n", Row(bpp, psnr, ssim).c_str());
}

struct RdCurveArgs {
  std::vector<std::string> models, images;
  std::string out, anchor, quality = "psnr", report;
  int angular = 0;
};

void RunRdCurve(const RdCurveArgs& a) {
  std::vector<Lenslet> images;
  std::vector<const sadn_lenslet*> ptrs;
  for (const auto& p : a.images) {
    images.push_back(LoadLenslet(p, a.angular));
    ptrs.push_back(images.back().get());
  }
  std::vector<sadn_rd_point> points;
  for (const auto& path : a.models) {
    Model m = LoadModel(path);
    sadn_rd_point p{};
    Check(sadn_evaluate(m.get(), ptrs.data(), ptrs.size(), &p), "evaluating " + path);
    points.push_back(p);
  }
  std::sort(points.begin(), points.end(),
            [](const sadn_rd_point& x, const sadn_rd_point& y) { return x.bpp < y.bpp; });
  sadn_rd_curve* c = nullptr;
  Check(sadn_rd_curve_create(&c), "RD curve");
  Curve curve(c);
  for (const auto& p : points) Check(sadn_rd_curve_add(c, p), "RD curve");
  Check(sadn_rd_curve_save(c, a.out.c_str()), "writing " + a.out);
  if (a.anchor.empty()) return;
  sadn_rd_curve* anchor = nullptr;
  Check(sadn_rd_curve_load(a.anchor.c_str(), &anchor), "reading " + a.anchor);
  Curve anchor_owned(anchor);
  const sadn_quality_axis axis =
      a.quality == "ssim" ? SADN_QUALITY_SSIM : SADN_QUALITY_PSNR;
  double rate = 0, quality = 0;
  Check(sadn_bd_rate(anchor, c, axis, &rate), "BD-rate");
  Check(sadn_bd_psnr(anchor, c, axis, &quality), "BD-quality");
  char text[256];
  std::snprintf(text, sizeof text, "BD-rate (%s): %+.3f %%\nBD-%s: %+.4f\n",
                a.quality.c_str(), rate, a.quality == "ssim" ? "SSIM" : "PSNR",
                quality);
  std::printf("%s", text);
  if (!a.report.empty()) {
    char csv[256];
    std::snprintf(csv, sizeof csv, "quality,bd_rate_percent,bd_quality\n%s,%.6f,%.6f\n",
                  a.quality.c_str(), rate, quality);
    WriteText(a.report, csv);
  }
}

struct EpiArgs {
  std::string in, out, axis = "h";
  int angular = 0, spatial_index = 0, angular_index = -1, max_shift = 4;
  bool slope = false;
};

void RunEpi(const EpiArgs& a) {
  Lenslet li = LoadLenslet(a.in, a.angular);
  int ang = 0;
  Check(sadn_lenslet_info(li.get(), nullptr, nullptr, nullptr, &ang), "info");
  const int angular_index = a.angular_index < 0 ? ang / 2 : a.angular_index;
  const sadn_epi_axis axis = a.axis == "v" ? SADN_EPI_VERTICAL : SADN_EPI_HORIZONTAL;
  if (!a.out.empty()) {
    Check(sadn_epi_save(li.get(), axis, a.spatial_index, angular_index, a.out.c_str()),
          "writing " + a.out);
  }
  if (a.slope) {
    int slope = 0;
    Check(sadn_epi_slope(li.get(), axis, a.spatial_index, angular_index,
                         a.max_shift, &slope),
          "EPI slope");
    std::printf("%d\n", slope);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SADN light field codec"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->each([&](const std::string&) {
    g.seed_set = true;
  });
  app.add_flag("-v,--verbose", g.verbose, "Verbose output");
  app.add_option("--config", g.config, "key=value config file")->check(CLI::ExistingFile);

  ConvertArgs conv;
  auto* c = app.add_subcommand("convert", "Lenslet image <-> sub-aperture directory");
  c->add_option("--to", conv.to)->required()->check(CLI::IsMember({"sais", "li"}));
  c->add_option("--in", conv.in)->required();
  c->add_option("--out", conv.out)->required();
  c->add_option("--A,--angular", conv.angular, "Micro-image size (default: sidecar)");

  SynthArgs syn;
  auto* s = app.add_subcommand("synth", "Render a synthetic light field");
  s->add_option("--scene", syn.scene, "Scene spec file (default: random scene)")
      ->check(CLI::ExistingFile);
  s->add_option("--scene-out", syn.scene_out, "Write the scene spec used");
  s->add_option("--out", syn.out, "Lenslet image path");
  s->add_option("--sais", syn.sais, "Sub-aperture image directory");
  s->add_option("--A,--angular", syn.angular)->check(CLI::Range(1, 255));
  s->add_option("--size", syn.size, "Spatial size of each view")->check(CLI::PositiveNumber);
  s->add_option("--channels", syn.channels)->check(CLI::IsMember({1, 3}));
  s->add_option("--layers", syn.layers, "Foreground layers of a random scene");
  s->add_option("--max-disparity", syn.max_disparity);

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a model");
  const std::vector<std::pair<std::string, std::string>> train_keys = {
      {"--lambda", "lambda"}, {"--lambda-index", "lambda_index"},
      {"--lr", "lr"}, {"--entropy-lr-scale", "entropy_lr_scale"},
      {"--steps", "steps"}, {"--batch", "batch"},
      {"--patch", "patch"}, {"--checkpoint-interval", "checkpoint_interval"},
      {"--log-interval", "log_interval"}, {"--data", "data"},
      {"--synthetic-count", "synthetic_count"},
      {"--synthetic-size", "synthetic_size"},
      {"--synthetic-layers", "synthetic_layers"},
      {"--synthetic-max-disparity", "synthetic_max_disparity"},
      {"--out", "out"}, {"--resume", "resume"}, {"--A,--angular", "angular"},
      {"--features", "features"}, {"--latent-channels", "latent_channels"},
      {"--channels", "color_channels"}, {"--stages", "stages"},
      {"--components", "components"}};
  for (const auto& [flag, key] : train_keys) {
    const std::string k = key;
    t->add_option_function<std::string>(
        flag, [&tr, k](const std::string& v) { tr.flags[k] = v; });
  }

  EncodeArgs enc;
  auto* e = app.add_subcommand("encode", "Compress a lenslet image");
  e->add_option("--model", enc.model)->required()->check(CLI::ExistingFile);
  e->add_option("--in", enc.in)->required()->check(CLI::ExistingFile);
  e->add_option("--out", enc.out)->required();
  e->add_option("--A,--angular", enc.angular);

  DecodeArgs dec;
  auto* d = app.add_subcommand("decode", "Decompress a bitstream");
  d->add_option("--model", dec.model)->required()->check(CLI::ExistingFile);
  d->add_option("--in", dec.in)->required()->check(CLI::ExistingFile);
  d->add_option("--out", dec.out)->required();

  EvalArgs ev;
  auto* v = app.add_subcommand("eval", "Print bpp,psnr,ssim for a reconstruction");
  v->add_option("--ref", ev.ref)->required()->check(CLI::ExistingFile);
  v->add_option("--rec", ev.rec)->required()->check(CLI::ExistingFile);
  v->add_option("--bitstream", ev.bitstream)->check(CLI::ExistingFile);
  v->add_option("--A,--angular", ev.angular);
  v->add_flag("--sai-mean", ev.sai_mean, "PSNR averaged over views");
  v->add_flag("--header", ev.header, "Print the CSV header");

  RdCurveArgs rd;
  auto* r = app.add_subcommand("rdcurve", "RD curve over checkpoints and BD deltas");
  r->add_option("--models", rd.models)->required()->expected(1, -1);
  r->add_option("--images", rd.images)->required()->expected(1, -1);
  r->add_option("--out", rd.out)->required();
  r->add_option("--anchor", rd.anchor)->check(CLI::ExistingFile);
  r->add_option("--quality", rd.quality)->check(CLI::IsMember({"psnr", "ssim"}));
  r->add_option("--report", rd.report, "BD report CSV");
  r->add_option("--A,--angular", rd.angular);

  EpiArgs ep;
  auto* p = app.add_subcommand("epi", "Extract an epipolar plane image");
  p->add_option("--in", ep.in)->required()->check(CLI::ExistingFile);
  p->add_option("--out", ep.out);
  p->add_option("--axis", ep.axis)->check(CLI::IsMember({"h", "v"}));
  p->add_option("--spatial-index", ep.spatial_index);
  p->add_option("--angular-index", ep.angular_index, "Default: central view");
  p->add_option("--max-shift", ep.max_shift);
  p->add_option("--A,--angular", ep.angular);
  p->add_flag("--slope", ep.slope, "Print the estimated disparity");

  for (auto* sub : {c, s, t, e, d, v, r, p}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return kExitUsage;
  }

  try {
    if (*c) RunConvert(conv);
    else if (*s) RunSynth(syn, g);
    else if (*t) RunTrain(tr, g);
    else if (*e) RunEncode(enc);
    else if (*d) RunDecode(dec);
    else if (*v) RunEval(ev);
    else if (*r) RunRdCurve(rd);
    else if (*p) RunEpi(ep);
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", f.message.c_str());
    return ExitCodeOf(f.status);
  }
  return 0;
}
