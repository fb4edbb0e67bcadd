// Copyright 2026 The ECAT Authors.
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

// Differentiable operations recorded on a Tape. Spatial tensors are NHWC,
// token sequences are [batch, tokens, channels]. Every op validates shapes
// and throws ShapeError on mismatch.

#ifndef ECAT_NN_OPS_HPP_
#define ECAT_NN_OPS_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "ecat/nn/tape.hpp"
#include "ecat/nn/tensor.hpp"

namespace ecat::nn {

// Geometry of a strided square-kernel convolution.
struct ConvGeometry {
  int kernel = 5;
  int stride = 2;
  int padding = 2;
  int output_padding = 0;  // deconvolution only
};

// Output extent of a convolution over `in` pixels; throws if the geometry
// does not tile the input exactly.
std::int64_t ConvOutputExtent(std::int64_t in, const ConvGeometry& g);
std::int64_t DeconvOutputExtent(std::int64_t in, const ConvGeometry& g);

// Cross-correlation. x: [B,H,W,Cin], w: [Cout,k,k,Cin], b: [Cout].
template <typename T>
Var<T> Conv2d(Var<T> x, Var<T> w, Var<T> b, const ConvGeometry& g);

// Transposed convolution, the adjoint of Conv2d for the same kernel tensor.
// x: [B,H,W,Cin], w: [Cin,k,k,Cout], b: [Cout].
template <typename T>
Var<T> Deconv2d(Var<T> x, Var<T> w, Var<T> b, const ConvGeometry& g);

// Affine map over the last axis. w: [Cout,Cin], b: [Cout].
template <typename T>
Var<T> Linear(Var<T> x, Var<T> w, Var<T> b);

template <typename T>
Var<T> LeakyRelu(Var<T> x, T slope);

// Exact (erf) GELU.
template <typename T>
Var<T> Gelu(Var<T> x);

// log(1 + exp(x)) + offset.
template <typename T>
Var<T> Softplus(Var<T> x, T offset);

// Normalizes over the last axis, then applies gamma/beta ([C] each).
template <typename T>
Var<T> LayerNorm(Var<T> x, Var<T> gamma, Var<T> beta, T eps);

// Scaled dot-product self-attention over packed projections.
// qkv: [B,T,3C] laid out as [q | k | v]; returns [B,T,C] (pre output
// projection). Head h owns channels [h*C/heads, (h+1)*C/heads).
template <typename T>
Var<T> SelfAttention(Var<T> qkv, int heads);

// Attention probabilities [B,heads,T,T] for inspection.
template <typename T>
Tensor<T> AttentionProbabilities(const Tensor<T>& qkv, int heads);

// a + b where b's shape is a suffix of a's shape (broadcast over leading
// axes).
template <typename T>
Var<T> Add(Var<T> a, Var<T> b);

template <typename T>
Var<T> Mul(Var<T> a, Var<T> b);

template <typename T>
Var<T> Scale(Var<T> x, T s);

// x + c with c a constant of the same shape (gradient is the identity).
template <typename T>
Var<T> AddConstant(Var<T> x, const Tensor<T>& c);

template <typename T>
Var<T> Sum(Var<T> x);

template <typename T>
Var<T> Reshape(Var<T> x, Shape shape);

template <typename T>
Var<T> ConcatLast(std::span<const Var<T>> parts);

template <typename T>
Var<T> SliceLast(Var<T> x, std::int64_t begin, std::int64_t length);

// seq: [B,T,C], token: [1,C] -> [B,T+1,C] with the token at position 0.
template <typename T>
Var<T> PrependToken(Var<T> seq, Var<T> token);

// seq: [B,T,C] -> [B,count,C] starting at token `begin`.
template <typename T>
Var<T> SliceTokens(Var<T> seq, std::int64_t begin, std::int64_t count);

// Zero padding / cropping of the two spatial axes of an NHWC tensor.
template <typename T>
Var<T> PadSpatial(Var<T> x, int top, int bottom, int left, int right);
template <typename T>
Var<T> CropSpatial(Var<T> x, int top, int bottom, int left, int right);

// y = x * scale[c] + shift[c] with constant per-channel coefficients.
template <typename T>
Var<T> AffineChannels(Var<T> x, std::span<const T> scale,
                      std::span<const T> shift);

// Mean over all elements of (x - target)^2; target is a constant.
template <typename T>
Var<T> MeanSquaredError(Var<T> x, const Tensor<T>& target);

// Mean over the batch of -ln softmax(logits)[label]. logits: [B,K].
template <typename T>
Var<T> SoftmaxCrossEntropy(Var<T> logits, std::span<const int> labels);

// Numerically stable softmax of one vector.
template <typename T>
std::vector<T> Softmax(std::span<const T> x);

// Row-wise softmax over the last axis.
template <typename T>
Tensor<T> SoftmaxRows(const Tensor<T>& x);

}  // namespace ecat::nn

#endif  // ECAT_NN_OPS_HPP_
