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

#include "tensor.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "error.hpp"
#include "util.hpp"

namespace sadn {

namespace internal {
struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  Tensor::BackwardFn backward;
};
}  // namespace internal

using internal::Node;

std::string Shape::ToString() const {
  return "(" + std::to_string(n) + "," + std::to_string(c) + "," +
         std::to_string(h) + "," + std::to_string(w) + ")";
}

// --- Tensor -----------------------------------------------------------------

Tensor Tensor::Zeros(Shape shape, bool requires_grad) {
  return Full(shape, 0.0, requires_grad);
}

Tensor Tensor::Full(Shape shape, double value, bool requires_grad) {
  return FromData(shape, std::vector<double>(shape.numel(), value),
                  requires_grad);
}

Tensor Tensor::FromData(Shape shape, std::vector<double> data,
                        bool requires_grad) {
  Require(shape.n >= 0 && shape.c >= 0 && shape.h >= 0 && shape.w >= 0,
          "negative tensor extent");
  Require(data.size() == shape.numel(),
          "tensor data length does not match shape " + shape.ToString());
  auto node = std::make_shared<Node>();
  node->shape = shape;
  node->data = std::move(data);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::Scalar(double value, bool requires_grad) {
  return FromData({1, 1, 1, 1}, {value}, requires_grad);
}

Tensor Tensor::MakeOp(Shape shape, std::vector<double> data,
                      std::vector<Tensor> inputs, BackwardFn backward) {
  Tensor out = FromData(shape, std::move(data));
  const bool needs = std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) {
    return t.defined() && t.requires_grad();
  });
  if (needs && backward) {
    out.node_->requires_grad = true;
    for (const Tensor& t : inputs) {
      if (t.defined() && t.requires_grad()) out.node_->parents.push_back(t.node_);
    }
    out.node_->backward = std::move(backward);
  }
  return out;
}

const Shape& Tensor::shape() const { return node_->shape; }
bool Tensor::requires_grad() const { return node_->requires_grad; }
std::span<const double> Tensor::data() const { return node_->data; }
std::span<double> Tensor::mutable_data() { return node_->data; }

double Tensor::item() const {
  Require(numel() == 1, "item() on non-scalar tensor " + shape().ToString());
  return node_->data[0];
}

double Tensor::at(int n, int c, int h, int w) const {
  const Shape& s = shape();
  return node_->data[((static_cast<std::size_t>(n) * s.c + c) * s.h + h) * s.w + w];
}

bool Tensor::has_grad() const { return !node_->grad.empty(); }
std::span<const double> Tensor::grad() const { return node_->grad; }

std::span<double> Tensor::mutable_grad() const {
  if (node_->grad.empty()) node_->grad.assign(node_->data.size(), 0.0);
  return node_->grad;
}

void Tensor::ZeroGrad() const { node_->grad.clear(); }

Tensor Tensor::Detach() const { return FromData(shape(), node_->data); }

void Backward(const Tensor& loss) {
  Require(loss.defined(), "backward on undefined tensor");
  Require(loss.numel() == 1,
          "backward needs a scalar loss, got " + loss.shape().ToString());
  if (!loss.requires_grad()) {
    Fail(ErrorCode::kInvalidArgument,
         "loss is detached: no parameter in its graph requires a gradient");
  }
  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(loss.node_.get(), 0);
  seen.insert(loss.node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  for (Node* n : order) {
    if (n->backward) n->grad.assign(n->data.size(), 0.0);
  }
  if (loss.node_->grad.empty()) loss.node_->grad.assign(1, 0.0);
  loss.node_->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward) n->backward(n->grad);
  }
}

// --- ConvSpec ---------------------------------------------------------------

ConvSpec ConvSpec::Same(int in, int out, int kernel, int dilation) {
  ConvSpec s;
  s.kernel_h = s.kernel_w = kernel;
  s.in_channels = in;
  s.out_channels = out;
  s.dilation_h = s.dilation_w = dilation;
  const int span = (kernel - 1) * dilation;
  Require(span % 2 == 0, "'same' padding needs an odd effective kernel");
  s.pad_h = s.pad_w = span / 2;
  s.Validate();
  return s;
}

ConvSpec ConvSpec::Valid(int in, int out, int kernel, int stride,
                         int dilation) {
  ConvSpec s;
  s.kernel_h = s.kernel_w = kernel;
  s.in_channels = in;
  s.out_channels = out;
  s.stride_h = s.stride_w = stride;
  s.dilation_h = s.dilation_w = dilation;
  s.Validate();
  return s;
}

ConvSpec ConvSpec::Strided(int in, int out, int kernel, int stride, int pad) {
  ConvSpec s;
  s.kernel_h = s.kernel_w = kernel;
  s.in_channels = in;
  s.out_channels = out;
  s.stride_h = s.stride_w = stride;
  s.pad_h = s.pad_w = pad;
  s.Validate();
  return s;
}

ConvSpec ConvSpec::AsTransposed() const {
  ConvSpec s = *this;
  s.transposed = true;
  std::swap(s.in_channels, s.out_channels);
  return s;
}

void ConvSpec::Validate() const {
  Require(kernel_h >= 1 && kernel_w >= 1, "kernel extents must be >= 1");
  Require(in_channels >= 1 && out_channels >= 1, "channel counts must be >= 1");
  Require(stride_h >= 1 && stride_w >= 1, "strides must be >= 1");
  Require(dilation_h >= 1 && dilation_w >= 1, "dilations must be >= 1");
  Require(pad_h >= 0 && pad_w >= 0, "padding must be >= 0");
}

Shape ConvSpec::weight_shape() const {
  if (transposed) return {in_channels, out_channels, kernel_h, kernel_w};
  return {out_channels, in_channels, kernel_h, kernel_w};
}

int ConvSpec::OutputH(int in_h) const {
  if (transposed) return (in_h - 1) * stride_h + effective_kernel_h() - 2 * pad_h;
  return (in_h + 2 * pad_h - effective_kernel_h()) / stride_h + 1;
}

int ConvSpec::OutputW(int in_w) const {
  if (transposed) return (in_w - 1) * stride_w + effective_kernel_w() - 2 * pad_w;
  return (in_w + 2 * pad_w - effective_kernel_w()) / stride_w + 1;
}

// --- Convolution ------------------------------------------------------------

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

// Forward-conv geometry: `channels` x in_h x in_w image, out_h x out_w grid.
struct Geometry {
  int channels, in_h, in_w;
  int kh, kw, sh, sw, dh, dw, ph, pw;
  int out_h, out_w;
  int rows() const { return channels * kh * kw; }
  int cols() const { return out_h * out_w; }
};

Geometry MakeGeometry(const ConvSpec& s, int channels, int in_h, int in_w,
                      int out_h, int out_w) {
  return {channels, in_h, in_w, s.kernel_h, s.kernel_w, s.stride_h, s.stride_w,
          s.dilation_h, s.dilation_w, s.pad_h, s.pad_w, out_h, out_w};
}

void Im2Col(const double* x, const Geometry& g, double* cols) {
  for (int c = 0; c < g.channels; ++c) {
    const double* xc = x + static_cast<std::size_t>(c) * g.in_h * g.in_w;
    for (int p = 0; p < g.kh; ++p) {
      for (int q = 0; q < g.kw; ++q) {
        double* row = cols + static_cast<std::size_t>((c * g.kh + p) * g.kw + q) * g.cols();
        for (int i = 0; i < g.out_h; ++i) {
          const int y = i * g.sh + p * g.dh - g.ph;
          double* dst = row + static_cast<std::size_t>(i) * g.out_w;
          if (y < 0 || y >= g.in_h) {
            std::fill(dst, dst + g.out_w, 0.0);
            continue;
          }
          const double* src = xc + static_cast<std::size_t>(y) * g.in_w;
          for (int j = 0; j < g.out_w; ++j) {
            const int x0 = j * g.sw + q * g.dw - g.pw;
            dst[j] = (x0 >= 0 && x0 < g.in_w) ? src[x0] : 0.0;
          }
        }
      }
    }
  }
}

// Accumulates columns back into the image (adjoint of Im2Col).
void Col2Im(const double* cols, const Geometry& g, double* x) {
  for (int c = 0; c < g.channels; ++c) {
    double* xc = x + static_cast<std::size_t>(c) * g.in_h * g.in_w;
    for (int p = 0; p < g.kh; ++p) {
      for (int q = 0; q < g.kw; ++q) {
        const double* row =
            cols + static_cast<std::size_t>((c * g.kh + p) * g.kw + q) * g.cols();
        for (int i = 0; i < g.out_h; ++i) {
          const int y = i * g.sh + p * g.dh - g.ph;
          if (y < 0 || y >= g.in_h) continue;
          const double* src = row + static_cast<std::size_t>(i) * g.out_w;
          double* dst = xc + static_cast<std::size_t>(y) * g.in_w;
          for (int j = 0; j < g.out_w; ++j) {
            const int x0 = j * g.sw + q * g.dw - g.pw;
            if (x0 >= 0 && x0 < g.in_w) dst[x0] += src[j];
          }
        }
      }
    }
  }
}

void CheckConvArgs(const Tensor& x, const Tensor& weight, const Tensor& bias,
                   const ConvSpec& spec) {
  spec.Validate();
  Require(x.defined() && weight.defined(), "conv needs input and weight");
  Require(x.shape().c == spec.in_channels,
          "conv input has " + std::to_string(x.shape().c) + " channels, spec " +
              std::to_string(spec.in_channels));
  const Shape ws = spec.weight_shape();
  Require(weight.shape() == ws, "conv weight shape " +
                                    weight.shape().ToString() + " expected " +
                                    ws.ToString());
  if (bias.defined()) {
    Require(bias.shape() == spec.bias_shape(), "conv bias shape mismatch");
  }
}

void AddBias(const Tensor& bias, int n, int channels, std::size_t plane,
             std::vector<double>& out) {
  if (!bias.defined()) return;
  const auto b = bias.data();
  for (int i = 0; i < n; ++i)
    for (int o = 0; o < channels; ++o) {
      double* p = out.data() + (static_cast<std::size_t>(i) * channels + o) * plane;
      for (std::size_t k = 0; k < plane; ++k) p[k] += b[o];
    }
}

void AccumulateBiasGrad(Tensor bias, std::span<const double> g, int n,
                        int channels, std::size_t plane) {
  if (!bias.defined() || !bias.requires_grad()) return;
  auto gb = bias.mutable_grad();
  for (int i = 0; i < n; ++i)
    for (int o = 0; o < channels; ++o) {
      const double* p = g.data() + (static_cast<std::size_t>(i) * channels + o) * plane;
      double s = 0.0;
      for (std::size_t k = 0; k < plane; ++k) s += p[k];
      gb[o] += s;
    }
}

}  // namespace

Tensor Conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              const ConvSpec& spec) {
  Require(!spec.transposed, "Conv2d given a transposed spec");
  CheckConvArgs(x, weight, bias, spec);
  const Shape in = x.shape();
  if (in.h + 2 * spec.pad_h < spec.effective_kernel_h() ||
      in.w + 2 * spec.pad_w < spec.effective_kernel_w()) {
    Fail(ErrorCode::kInvalidArgument,
         "effective kernel larger than padded input " + in.ToString());
  }
  const Shape out{in.n, spec.out_channels, spec.OutputH(in.h), spec.OutputW(in.w)};
  const Geometry g = MakeGeometry(spec, in.c, in.h, in.w, out.h, out.w);
  std::vector<double> result(out.numel());
  std::vector<double> cols(static_cast<std::size_t>(g.rows()) * g.cols());
  const ConstMatMap wm(weight.data().data(), out.c, g.rows());
  for (int n = 0; n < in.n; ++n) {
    Im2Col(x.data().data() + n * in.c * in.plane(), g, cols.data());
    MatMap(result.data() + n * out.c * out.plane(), out.c, g.cols()).noalias() =
        wm * ConstMatMap(cols.data(), g.rows(), g.cols());
  }
  AddBias(bias, out.n, out.c, out.plane(), result);

  return Tensor::MakeOp(
      out, std::move(result), {x, weight, bias},
      [x, weight, bias, g, in, out](std::span<const double> gout) mutable {
        std::vector<double> cols(static_cast<std::size_t>(g.rows()) * g.cols());
        const ConstMatMap wm(weight.data().data(), out.c, g.rows());
        for (int n = 0; n < in.n; ++n) {
          const ConstMatMap go(gout.data() + n * out.c * out.plane(), out.c, g.cols());
          if (weight.requires_grad()) {
            Im2Col(x.data().data() + n * in.c * in.plane(), g, cols.data());
            MatMap(weight.mutable_grad().data(), out.c, g.rows()).noalias() +=
                go * ConstMatMap(cols.data(), g.rows(), g.cols()).transpose();
          }
          if (x.requires_grad()) {
            MatMap(cols.data(), g.rows(), g.cols()).noalias() = wm.transpose() * go;
            Col2Im(cols.data(), g, x.mutable_grad().data() + n * in.c * in.plane());
          }
        }
        AccumulateBiasGrad(bias, gout, out.n, out.c, out.plane());
      });
}

Tensor Conv2dTransposed(const Tensor& x, const Tensor& weight,
                        const Tensor& bias, const ConvSpec& spec) {
  Require(spec.transposed, "Conv2dTransposed given a forward spec");
  CheckConvArgs(x, weight, bias, spec);
  const Shape in = x.shape();
  const Shape out{in.n, spec.out_channels, spec.OutputH(in.h), spec.OutputW(in.w)};
  Require(out.h >= 1 && out.w >= 1, "transposed conv output would be empty");
  // The matching forward conv maps `out` (out_channels) onto `in`.
  const Geometry g = MakeGeometry(spec, out.c, out.h, out.w, in.h, in.w);
  std::vector<double> result(out.numel(), 0.0);
  std::vector<double> cols(static_cast<std::size_t>(g.rows()) * g.cols());
  const ConstMatMap wm(weight.data().data(), in.c, g.rows());
  for (int n = 0; n < in.n; ++n) {
    MatMap(cols.data(), g.rows(), g.cols()).noalias() =
        wm.transpose() * ConstMatMap(x.data().data() + n * in.c * in.plane(), in.c, g.cols());
    Col2Im(cols.data(), g, result.data() + n * out.c * out.plane());
  }
  AddBias(bias, out.n, out.c, out.plane(), result);

  return Tensor::MakeOp(
      out, std::move(result), {x, weight, bias},
      [x, weight, bias, g, in, out](std::span<const double> gout) mutable {
        std::vector<double> cols(static_cast<std::size_t>(g.rows()) * g.cols());
        const ConstMatMap wm(weight.data().data(), in.c, g.rows());
        for (int n = 0; n < in.n; ++n) {
          Im2Col(gout.data() + n * out.c * out.plane(), g, cols.data());
          const ConstMatMap gc(cols.data(), g.rows(), g.cols());
          if (x.requires_grad()) {
            MatMap(x.mutable_grad().data() + n * in.c * in.plane(), in.c, g.cols())
                .noalias() += wm * gc;
          }
          if (weight.requires_grad()) {
            MatMap(weight.mutable_grad().data(), in.c, g.rows()).noalias() +=
                ConstMatMap(x.data().data() + n * in.c * in.plane(), in.c, g.cols()) *
                gc.transpose();
          }
        }
        AccumulateBiasGrad(bias, gout, out.n, out.c, out.plane());
      });
}

// --- Resampling and channel plumbing ----------------------------------------

Tensor UpsampleNearest(const Tensor& x, int factor) {
  Require(factor >= 1, "upsample factor must be >= 1");
  const Shape in = x.shape();
  const Shape out{in.n, in.c, in.h * factor, in.w * factor};
  std::vector<double> result(out.numel());
  const auto src = x.data();
  for (std::size_t nc = 0; nc < static_cast<std::size_t>(in.n) * in.c; ++nc)
    for (int i = 0; i < out.h; ++i)
      for (int j = 0; j < out.w; ++j)
        result[(nc * out.h + i) * out.w + j] =
            src[(nc * in.h + i / factor) * in.w + j / factor];
  return Tensor::MakeOp(out, std::move(result), {x},
                        [x, in, out, factor](std::span<const double> g) mutable {
                          auto gx = x.mutable_grad();
                          for (std::size_t nc = 0; nc < static_cast<std::size_t>(in.n) * in.c; ++nc)
                            for (int i = 0; i < out.h; ++i)
                              for (int j = 0; j < out.w; ++j)
                                gx[(nc * in.h + i / factor) * in.w + j / factor] +=
                                    g[(nc * out.h + i) * out.w + j];
                        });
}

Tensor AvgPool(const Tensor& x, int factor) {
  Require(factor >= 1, "pool factor must be >= 1");
  const Shape in = x.shape();
  Require(in.h % factor == 0 && in.w % factor == 0,
          "pool factor must divide spatial dims");
  const Shape out{in.n, in.c, in.h / factor, in.w / factor};
  const double inv = 1.0 / (static_cast<double>(factor) * factor);
  std::vector<double> result(out.numel(), 0.0);
  const auto src = x.data();
  for (std::size_t nc = 0; nc < static_cast<std::size_t>(in.n) * in.c; ++nc)
    for (int i = 0; i < in.h; ++i)
      for (int j = 0; j < in.w; ++j)
        result[(nc * out.h + i / factor) * out.w + j / factor] +=
            src[(nc * in.h + i) * in.w + j] * inv;
  return Tensor::MakeOp(out, std::move(result), {x},
                        [x, in, out, factor, inv](std::span<const double> g) mutable {
                          auto gx = x.mutable_grad();
                          for (std::size_t nc = 0; nc < static_cast<std::size_t>(in.n) * in.c; ++nc)
                            for (int i = 0; i < in.h; ++i)
                              for (int j = 0; j < in.w; ++j)
                                gx[(nc * in.h + i) * in.w + j] +=
                                    g[(nc * out.h + i / factor) * out.w + j / factor] * inv;
                        });
}

Tensor ConcatChannels(std::span<const Tensor> xs) {
  Require(!xs.empty(), "concat of zero tensors");
  const Shape first = xs.front().shape();
  int channels = 0;
  for (const Tensor& t : xs) {
    const Shape s = t.shape();
    Require(s.n == first.n && s.h == first.h && s.w == first.w,
            "concat spatial/batch mismatch: " + s.ToString() + " vs " +
                first.ToString());
    channels += s.c;
  }
  const Shape out{first.n, channels, first.h, first.w};
  const std::size_t plane = out.plane();
  std::vector<double> result(out.numel());
  for (int n = 0; n < out.n; ++n) {
    int offset = 0;
    for (const Tensor& t : xs) {
      const int c = t.shape().c;
      std::copy_n(t.data().data() + static_cast<std::size_t>(n) * c * plane, c * plane,
                  result.data() + (static_cast<std::size_t>(n) * channels + offset) * plane);
      offset += c;
    }
  }
  std::vector<Tensor> inputs(xs.begin(), xs.end());
  return Tensor::MakeOp(out, std::move(result), inputs,
                        [inputs, out, plane](std::span<const double> g) mutable {
                          for (int n = 0; n < out.n; ++n) {
                            int offset = 0;
                            for (Tensor& t : inputs) {
                              const int c = t.shape().c;
                              if (t.requires_grad()) {
                                auto gt = t.mutable_grad();
                                const double* src = g.data() + (static_cast<std::size_t>(n) * out.c + offset) * plane;
                                double* dst = gt.data() + static_cast<std::size_t>(n) * c * plane;
                                for (std::size_t k = 0; k < c * plane; ++k) dst[k] += src[k];
                              }
                              offset += c;
                            }
                          }
                        });
}

Tensor SliceChannels(const Tensor& x, int begin, int count) {
  const Shape in = x.shape();
  Require(begin >= 0 && count >= 1 && begin + count <= in.c,
          "channel slice out of range");
  const Shape out{in.n, count, in.h, in.w};
  const std::size_t plane = in.plane();
  std::vector<double> result(out.numel());
  for (int n = 0; n < in.n; ++n)
    std::copy_n(x.data().data() + (static_cast<std::size_t>(n) * in.c + begin) * plane,
                count * plane, result.data() + static_cast<std::size_t>(n) * count * plane);
  return Tensor::MakeOp(out, std::move(result), {x},
                        [x, in, begin, count, plane](std::span<const double> g) mutable {
                          auto gx = x.mutable_grad();
                          for (int n = 0; n < in.n; ++n)
                            for (std::size_t k = 0; k < count * plane; ++k)
                              gx[(static_cast<std::size_t>(n) * in.c + begin) * plane + k] +=
                                  g[static_cast<std::size_t>(n) * count * plane + k];
                        });
}

// --- Elementwise --------------------------------------------------------------

namespace {

template <typename Fwd, typename Deriv>
Tensor Unary(const Tensor& x, Fwd fwd, Deriv deriv) {
  const auto src = x.data();
  std::vector<double> result(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) result[i] = fwd(src[i]);
  return Tensor::MakeOp(x.shape(), std::move(result), {x},
                        [x, deriv](std::span<const double> g) mutable {
                          auto gx = x.mutable_grad();
                          const auto v = x.data();
                          for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * deriv(v[i]);
                        });
}

void RequireSameShape(const Tensor& a, const Tensor& b, const char* op) {
  Require(a.shape() == b.shape(), std::string(op) + ": shape mismatch " +
                                      a.shape().ToString() + " vs " +
                                      b.shape().ToString());
}

}  // namespace

Tensor LeakyRelu(const Tensor& x, double slope) {
  Require(slope >= 0.0 && slope < 1.0, "leaky slope must be in [0, 1)");
  return Unary(
      x, [slope](double v) { return std::max(v, slope * v); },
      [slope](double v) { return v >= 0.0 ? 1.0 : slope; });
}

Tensor Add(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "add");
  std::vector<double> r(a.numel());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = a.data()[i] + b.data()[i];
  return Tensor::MakeOp(a.shape(), std::move(r), {a, b},
                        [a, b](std::span<const double> g) mutable {
                          for (const Tensor* t : {&a, &b}) {
                            if (!t->requires_grad()) continue;
                            auto gt = t->mutable_grad();
                            for (std::size_t i = 0; i < g.size(); ++i) gt[i] += g[i];
                          }
                        });
}

Tensor Sub(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "sub");
  std::vector<double> r(a.numel());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = a.data()[i] - b.data()[i];
  return Tensor::MakeOp(a.shape(), std::move(r), {a, b},
                        [a, b](std::span<const double> g) mutable {
                          if (a.requires_grad()) {
                            auto ga = a.mutable_grad();
                            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                          }
                          if (b.requires_grad()) {
                            auto gb = b.mutable_grad();
                            for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
                          }
                        });
}

Tensor Mul(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "mul");
  std::vector<double> r(a.numel());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = a.data()[i] * b.data()[i];
  return Tensor::MakeOp(a.shape(), std::move(r), {a, b},
                        [a, b](std::span<const double> g) mutable {
                          if (a.requires_grad()) {
                            auto ga = a.mutable_grad();
                            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * b.data()[i];
                          }
                          if (b.requires_grad()) {
                            auto gb = b.mutable_grad();
                            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * a.data()[i];
                          }
                        });
}

Tensor Scale(const Tensor& x, double factor) {
  return Unary(
      x, [factor](double v) { return v * factor; },
      [factor](double) { return factor; });
}

Tensor AddScalar(const Tensor& x, double value) {
  return Unary(
      x, [value](double v) { return v + value; }, [](double) { return 1.0; });
}

Tensor Square(const Tensor& x) {
  return Unary(
      x, [](double v) { return v * v; }, [](double v) { return 2.0 * v; });
}

Tensor Sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.data()) s += v;
  return Tensor::MakeOp({1, 1, 1, 1}, {s}, {x},
                        [x](std::span<const double> g) mutable {
                          for (double& v : x.mutable_grad()) v += g[0];
                        });
}

Tensor Mean(const Tensor& x) {
  Require(x.numel() > 0, "mean of empty tensor");
  return Scale(Sum(x), 1.0 / static_cast<double>(x.numel()));
}

Tensor Clamp(const Tensor& x, double lo, double hi) {
  return Unary(
      x, [lo, hi](double v) { return std::clamp(v, lo, hi); },
      [lo, hi](double v) { return (v > lo && v < hi) ? 1.0 : 0.0; });
}

Tensor Round(const Tensor& x) {
  return Unary(
      x, [](double v) { return std::round(v); }, [](double) { return 0.0; });
}

// --- Gradient check ---------------------------------------------------------

double GradCheck(const std::function<Tensor()>& build,
                 std::span<const Tensor> params, double eps,
                 std::size_t n_samples, std::uint64_t seed) {
  Require(eps > 0.0, "grad check step must be > 0");
  std::vector<Tensor> ps(params.begin(), params.end());
  for (Tensor& p : ps) p.ZeroGrad();
  const Tensor loss = build();
  if (!std::isfinite(loss.item())) Fail(ErrorCode::kNumeric, "non-finite loss");
  Backward(loss);

  // (param index, element index) pairs.
  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (std::size_t i = 0; i < ps.size(); ++i)
    for (std::size_t k = 0; k < ps[i].numel(); ++k) coords.emplace_back(i, k);
  if (n_samples < coords.size()) {
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < n_samples; ++i) {
      const std::size_t j = i + rng.Next() % (coords.size() - i);
      std::swap(coords[i], coords[j]);
    }
    coords.resize(n_samples);
  }

  double worst = 0.0;
  for (auto [pi, k] : coords) {
    Tensor& p = ps[pi];
    const double analytic = p.has_grad() ? p.grad()[k] : 0.0;
    const double saved = p.data()[k];
    p.mutable_data()[k] = saved + eps;
    const double plus = build().item();
    p.mutable_data()[k] = saved - eps;
    const double minus = build().item();
    p.mutable_data()[k] = saved;
    const double numeric = (plus - minus) / (2.0 * eps);
    if (!std::isfinite(analytic) || !std::isfinite(numeric)) {
      Fail(ErrorCode::kNumeric, "non-finite value in gradient check");
    }
    const double denom =
        std::max({std::abs(analytic), std::abs(numeric), 1e-12});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  }
  return worst;
}

}  // namespace sadn
