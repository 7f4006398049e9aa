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

#ifndef SADN_CORE_TENSOR_HPP_
#define SADN_CORE_TENSOR_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sadn {

struct Shape {
  int n = 0;  // batch
  int c = 0;  // channels
  int h = 0;
  int w = 0;

  std::size_t numel() const {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  bool operator==(const Shape&) const = default;
  std::string ToString() const;
};

namespace internal {
struct Node;
}

// Handle to a node of a reverse-mode autodiff graph. Copies share the node.
// Data is rank-4 (batch, channels, height, width), row-major, double.
class Tensor {
 public:
  using BackwardFn = std::function<void(std::span<const double> out_grad)>;

  Tensor() = default;

  static Tensor Zeros(Shape shape, bool requires_grad = false);
  static Tensor Full(Shape shape, double value, bool requires_grad = false);
  static Tensor FromData(Shape shape, std::vector<double> data,
                         bool requires_grad = false);
  static Tensor Scalar(double value, bool requires_grad = false);

  // Result of a differentiable op. `backward` receives d loss / d output and
  // must accumulate into the inputs' gradients. The graph edge is recorded
  // only when some input requires a gradient.
  static Tensor MakeOp(Shape shape, std::vector<double> data,
                       std::vector<Tensor> inputs, BackwardFn backward);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t numel() const { return shape().numel(); }
  bool requires_grad() const;

  std::span<const double> data() const;
  // For parameter updates and in-place initialization. Must not be used on
  // tensors whose values a recorded graph still depends on.
  std::span<double> mutable_data();
  double item() const;
  double at(int n, int c, int h, int w) const;

  bool has_grad() const;
  std::span<const double> grad() const;
  // Allocates a zeroed buffer on first use.
  std::span<double> mutable_grad() const;
  void ZeroGrad() const;

  // Same values, no graph history, no gradient.
  Tensor Detach() const;

 private:
  friend void Backward(const Tensor& loss);
  explicit Tensor(std::shared_ptr<internal::Node> node)
      : node_(std::move(node)) {}
  std::shared_ptr<internal::Node> node_;
};

// Reverse-mode pass from a scalar loss. Leaf gradients accumulate across
// calls; intermediate gradients are recomputed each call.
void Backward(const Tensor& loss);

struct ConvSpec {
  int kernel_h = 1;
  int kernel_w = 1;
  int in_channels = 1;
  int out_channels = 1;
  int stride_h = 1;
  int stride_w = 1;
  int dilation_h = 1;
  int dilation_w = 1;
  int pad_h = 0;
  int pad_w = 0;
  bool transposed = false;

  // Stride 1, zero padding d (k - 1) / 2 so spatial size is preserved. The
  // effective kernel (k - 1) d + 1 must be odd.
  static ConvSpec Same(int in, int out, int kernel, int dilation = 1);
  // No padding.
  static ConvSpec Valid(int in, int out, int kernel, int stride = 1,
                        int dilation = 1);
  static ConvSpec Strided(int in, int out, int kernel, int stride, int pad);
  ConvSpec AsTransposed() const;

  void Validate() const;
  int effective_kernel_h() const { return (kernel_h - 1) * dilation_h + 1; }
  int effective_kernel_w() const { return (kernel_w - 1) * dilation_w + 1; }
  // Weight shape: (out, in, kh, kw) for conv, (in, out, kh, kw) transposed.
  Shape weight_shape() const;
  Shape bias_shape() const { return {1, out_channels, 1, 1}; }
  // Spatial output extents for a given input extent.
  int OutputH(int in_h) const;
  int OutputW(int in_w) const;
};

// out[n,o,i,j] = b[o] + sum_{c,p,q} x[n,c,i s + p d - pad, j s + q d - pad]
//                               * w[o,c,p,q]
// with zeros outside the input. `bias` may be undefined.
Tensor Conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              const ConvSpec& spec);
// Adjoint of Conv2d with the same geometry; weight laid out (in, out, kh, kw)
// where `in` is this op's input channel count.
Tensor Conv2dTransposed(const Tensor& x, const Tensor& weight,
                        const Tensor& bias, const ConvSpec& spec);

Tensor UpsampleNearest(const Tensor& x, int factor);
Tensor AvgPool(const Tensor& x, int factor);
Tensor ConcatChannels(std::span<const Tensor> xs);
Tensor SliceChannels(const Tensor& x, int begin, int count);
Tensor LeakyRelu(const Tensor& x, double slope);

Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);
Tensor Scale(const Tensor& x, double factor);
Tensor AddScalar(const Tensor& x, double value);
Tensor Square(const Tensor& x);
Tensor Sum(const Tensor& x);
Tensor Mean(const Tensor& x);
// Gradient passes only where lo < x < hi.
Tensor Clamp(const Tensor& x, double lo, double hi);
// Round half away from zero; gradient is zero.
Tensor Round(const Tensor& x);

// Max over sampled coordinates of |analytic - central difference| /
// max(|analytic|, |numeric|, 1e-12). `build` must rebuild the scalar loss
// from the current parameter values. Samples all coordinates when
// n_samples >= total parameter count. Throws ErrorCode::kNumeric on non-finite
// values.
double GradCheck(const std::function<Tensor()>& build,
                 std::span<const Tensor> params, double eps,
                 std::size_t n_samples, std::uint64_t seed = 1);

}  // namespace sadn

#endif  // SADN_CORE_TENSOR_HPP_
