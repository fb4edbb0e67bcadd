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

#include "ecat/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "gemm.hpp"

namespace ecat::nn {

std::string ShapeToString(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::int64_t ConvOutputExtent(std::int64_t in, const ConvGeometry& g) {
  if (in <= 0 || g.stride <= 0 || g.kernel <= 0) {
    throw ShapeError("invalid convolution geometry");
  }
  const std::int64_t span = in + 2 * g.padding - g.kernel;
  if (span < 0) throw ShapeError("kernel larger than padded input");
  const std::int64_t out = span / g.stride + 1;
  if (in % g.stride != 0 || out * g.stride != in) {
    throw ShapeError("spatial extent " + std::to_string(in) +
                     " is not divisible by stride " +
                     std::to_string(g.stride));
  }
  return out;
}

std::int64_t DeconvOutputExtent(std::int64_t in, const ConvGeometry& g) {
  if (in <= 0 || g.stride <= 0 || g.kernel <= 0) {
    throw ShapeError("invalid deconvolution geometry");
  }
  const std::int64_t out =
      (in - 1) * g.stride - 2 * g.padding + g.kernel + g.output_padding;
  if (out != in * g.stride) {
    throw ShapeError("deconvolution geometry does not scale extent " +
                     std::to_string(in) + " by stride " +
                     std::to_string(g.stride));
  }
  return out;
}

namespace {

using internal::Gemm;

template <typename T>
void RequireSameTape(const Var<T>& a, const Var<T>& b) {
  if (a.tape != b.tape) throw std::invalid_argument("vars from different tapes");
}

void RequireRank(const Shape& s, std::size_t rank, const char* what) {
  if (s.size() != rank) {
    throw ShapeError(std::string(what) + ": expected rank " +
                     std::to_string(rank) + ", got " + ShapeToString(s));
  }
}

// Gathers k*k*C patches for every position of an (gh x gw) output grid over
// an (h x w x c) image. Patch layout is (ky, kx, c).
template <typename T>
void Im2Col(const T* img, std::int64_t h, std::int64_t w, std::int64_t c,
            std::int64_t gh, std::int64_t gw, const ConvGeometry& g, T* cols) {
  const std::int64_t k = g.kernel;
  const std::int64_t row = k * k * c;
  for (std::int64_t gy = 0; gy < gh; ++gy) {
    for (std::int64_t gx = 0; gx < gw; ++gx) {
      T* dst = cols + (gy * gw + gx) * row;
      for (std::int64_t ky = 0; ky < k; ++ky) {
        const std::int64_t iy = gy * g.stride - g.padding + ky;
        for (std::int64_t kx = 0; kx < k; ++kx) {
          const std::int64_t ix = gx * g.stride - g.padding + kx;
          T* d = dst + (ky * k + kx) * c;
          if (iy < 0 || iy >= h || ix < 0 || ix >= w) {
            std::fill(d, d + c, T{0});
          } else {
            const T* s = img + (iy * w + ix) * c;
            std::copy(s, s + c, d);
          }
        }
      }
    }
  }
}

// Adjoint of Im2Col: scatters patches back, accumulating into `img`.
template <typename T>
void Col2Im(const T* cols, std::int64_t h, std::int64_t w, std::int64_t c,
            std::int64_t gh, std::int64_t gw, const ConvGeometry& g, T* img) {
  const std::int64_t k = g.kernel;
  const std::int64_t row = k * k * c;
  for (std::int64_t gy = 0; gy < gh; ++gy) {
    for (std::int64_t gx = 0; gx < gw; ++gx) {
      const T* src = cols + (gy * gw + gx) * row;
      for (std::int64_t ky = 0; ky < k; ++ky) {
        const std::int64_t iy = gy * g.stride - g.padding + ky;
        if (iy < 0 || iy >= h) continue;
        for (std::int64_t kx = 0; kx < k; ++kx) {
          const std::int64_t ix = gx * g.stride - g.padding + kx;
          if (ix < 0 || ix >= w) continue;
          const T* s = src + (ky * k + kx) * c;
          T* d = img + (iy * w + ix) * c;
          for (std::int64_t ch = 0; ch < c; ++ch) d[ch] += s[ch];
        }
      }
    }
  }
}

template <typename T>
void AddBiasRows(T* out, std::int64_t rows, std::int64_t cols, const T* bias) {
  for (std::int64_t r = 0; r < rows; ++r) {
    T* o = out + r * cols;
    for (std::int64_t c = 0; c < cols; ++c) o[c] += bias[c];
  }
}

template <typename T>
Tensor<T> SumRows(const T* g, std::int64_t rows, std::int64_t cols) {
  Tensor<T> db(Shape{cols});
  for (std::int64_t r = 0; r < rows; ++r) {
    const T* s = g + r * cols;
    for (std::int64_t c = 0; c < cols; ++c) db[c] += s[c];
  }
  return db;
}

template <typename T>
Var<T> Unary(Var<T> x, Tensor<T> out, Tensor<T> local_grad) {
  const std::size_t xid = x.id;
  return x.tape->Record(
      std::move(out), x.requires_grad(),
      [xid, lg = std::move(local_grad)](Tape<T>& tape, std::size_t self) {
        Tensor<T> dx = tape.GradRef(self);
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= lg[i];
        tape.Accumulate(xid, dx);
      });
}

}  // namespace

template <typename T>
Var<T> Conv2d(Var<T> x, Var<T> w, Var<T> b, const ConvGeometry& g) {
  RequireSameTape(x, w);
  RequireSameTape(x, b);
  const Shape& xs = x.shape();
  const Shape& ws = w.shape();
  RequireRank(xs, 4, "conv2d input");
  RequireRank(ws, 4, "conv2d weight");
  const std::int64_t batch = xs[0], h = xs[1], wd = xs[2], cin = xs[3];
  const std::int64_t cout = ws[0];
  if (ws[1] != g.kernel || ws[2] != g.kernel || ws[3] != cin ||
      b.shape() != Shape{cout}) {
    throw ShapeError("conv2d weight " + ShapeToString(ws) +
                     " incompatible with input " + ShapeToString(xs));
  }
  const std::int64_t oh = ConvOutputExtent(h, g);
  const std::int64_t ow = ConvOutputExtent(wd, g);
  const std::int64_t row = g.kernel * g.kernel * cin;
  const std::int64_t positions = oh * ow;

  Tensor<T> cols(Shape{batch * positions, row});
  const T* xd = x.value().data();
  for (std::int64_t n = 0; n < batch; ++n) {
    Im2Col(xd + n * h * wd * cin, h, wd, cin, oh, ow, g,
           cols.data() + n * positions * row);
  }
  Tensor<T> out(Shape{batch, oh, ow, cout});
  Gemm<T>(false, true, batch * positions, cout, row, cols.data(),
          w.value().data(), out.data(), false);
  AddBiasRows(out.data(), batch * positions, cout, b.value().data());

  const bool rg = x.requires_grad() || w.requires_grad() || b.requires_grad();
  const std::size_t xid = x.id, wid = w.id, bid = b.id;
  return x.tape->Record(
      std::move(out), rg,
      [=, cols = std::move(cols)](Tape<T>& tape, std::size_t self) {
        const Tensor<T>& dout = tape.GradRef(self);
        const std::int64_t rows = batch * positions;
        if (tape.requires_grad(wid)) {
          Tensor<T> dw(tape.value(wid).shape());
          Gemm<T>(true, false, cout, row, rows, dout.data(), cols.data(),
                  dw.data(), false);
          tape.Accumulate(wid, dw);
        }
        if (tape.requires_grad(bid)) {
          tape.Accumulate(bid, SumRows(dout.data(), rows, cout));
        }
        if (tape.requires_grad(xid)) {
          Tensor<T> dcols(Shape{rows, row});
          Gemm<T>(false, false, rows, row, cout, dout.data(),
                  tape.value(wid).data(), dcols.data(), false);
          Tensor<T> dx(Shape{batch, h, wd, cin});
          for (std::int64_t n = 0; n < batch; ++n) {
            Col2Im(dcols.data() + n * positions * row, h, wd, cin, oh, ow, g,
                   dx.data() + n * h * wd * cin);
          }
          tape.Accumulate(xid, dx);
        }
      });
}

template <typename T>
Var<T> Deconv2d(Var<T> x, Var<T> w, Var<T> b, const ConvGeometry& g) {
  RequireSameTape(x, w);
  RequireSameTape(x, b);
  const Shape& xs = x.shape();
  const Shape& ws = w.shape();
  RequireRank(xs, 4, "deconv2d input");
  RequireRank(ws, 4, "deconv2d weight");
  const std::int64_t batch = xs[0], h = xs[1], wd = xs[2], cin = xs[3];
  const std::int64_t cout = ws[3];
  if (ws[0] != cin || ws[1] != g.kernel || ws[2] != g.kernel ||
      b.shape() != Shape{cout}) {
    throw ShapeError("deconv2d weight " + ShapeToString(ws) +
                     " incompatible with input " + ShapeToString(xs));
  }
  const std::int64_t oh = DeconvOutputExtent(h, g);
  const std::int64_t ow = DeconvOutputExtent(wd, g);
  const std::int64_t row = g.kernel * g.kernel * cout;
  const std::int64_t positions = h * wd;

  Tensor<T> cols(Shape{batch * positions, row});
  Gemm<T>(false, false, batch * positions, row, cin, x.value().data(),
          w.value().data(), cols.data(), false);
  Tensor<T> out(Shape{batch, oh, ow, cout});
  for (std::int64_t n = 0; n < batch; ++n) {
    Col2Im(cols.data() + n * positions * row, oh, ow, cout, h, wd, g,
           out.data() + n * oh * ow * cout);
  }
  AddBiasRows(out.data(), batch * oh * ow, cout, b.value().data());

  const bool rg = x.requires_grad() || w.requires_grad() || b.requires_grad();
  const std::size_t xid = x.id, wid = w.id, bid = b.id;
  return x.tape->Record(
      std::move(out), rg, [=](Tape<T>& tape, std::size_t self) {
        const Tensor<T>& dout = tape.GradRef(self);
        if (tape.requires_grad(bid)) {
          tape.Accumulate(bid, SumRows(dout.data(), batch * oh * ow, cout));
        }
        if (!tape.requires_grad(wid) && !tape.requires_grad(xid)) return;
        const std::int64_t rows = batch * positions;
        Tensor<T> dcols(Shape{rows, row});
        for (std::int64_t n = 0; n < batch; ++n) {
          Im2Col(dout.data() + n * oh * ow * cout, oh, ow, cout, h, wd, g,
                 dcols.data() + n * positions * row);
        }
        if (tape.requires_grad(wid)) {
          Tensor<T> dw(tape.value(wid).shape());
          Gemm<T>(true, false, cin, row, rows, tape.value(xid).data(),
                  dcols.data(), dw.data(), false);
          tape.Accumulate(wid, dw);
        }
        if (tape.requires_grad(xid)) {
          Tensor<T> dx(Shape{batch, h, wd, cin});
          Gemm<T>(false, true, rows, cin, row, dcols.data(),
                  tape.value(wid).data(), dx.data(), false);
          tape.Accumulate(xid, dx);
        }
      });
}

template <typename T>
Var<T> Linear(Var<T> x, Var<T> w, Var<T> b) {
  RequireSameTape(x, w);
  RequireSameTape(x, b);
  const Shape& xs = x.shape();
  const Shape& ws = w.shape();
  RequireRank(ws, 2, "linear weight");
  if (xs.empty() || xs.back() != ws[1] || b.shape() != Shape{ws[0]}) {
    throw ShapeError("linear weight " + ShapeToString(ws) +
                     " incompatible with input " + ShapeToString(xs));
  }
  const std::int64_t cin = ws[1], cout = ws[0];
  const std::int64_t rows = NumElements(xs) / cin;
  Shape os = xs;
  os.back() = cout;
  Tensor<T> out(os);
  Gemm<T>(false, true, rows, cout, cin, x.value().data(), w.value().data(),
          out.data(), false);
  AddBiasRows(out.data(), rows, cout, b.value().data());

  const bool rg = x.requires_grad() || w.requires_grad() || b.requires_grad();
  const std::size_t xid = x.id, wid = w.id, bid = b.id;
  return x.tape->Record(
      std::move(out), rg, [=](Tape<T>& tape, std::size_t self) {
        const Tensor<T>& dout = tape.GradRef(self);
        if (tape.requires_grad(wid)) {
          Tensor<T> dw(Shape{cout, cin});
          Gemm<T>(true, false, cout, cin, rows, dout.data(),
                  tape.value(xid).data(), dw.data(), false);
          tape.Accumulate(wid, dw);
        }
        if (tape.requires_grad(bid)) {
          tape.Accumulate(bid, SumRows(dout.data(), rows, cout));
        }
        if (tape.requires_grad(xid)) {
          Tensor<T> dx(tape.value(xid).shape());
          Gemm<T>(false, false, rows, cin, cout, dout.data(),
                  tape.value(wid).data(), dx.data(), false);
          tape.Accumulate(xid, dx);
        }
      });
}

template <typename T>
Var<T> LeakyRelu(Var<T> x, T slope) {
  if (!(slope > T{0} && slope < T{1})) {
    throw std::invalid_argument("leaky_relu slope must lie in (0,1)");
  }
  const Tensor<T>& xv = x.value();
  Tensor<T> out(xv.shape()), lg(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const bool pos = xv[i] > T{0};
    out[i] = pos ? xv[i] : slope * xv[i];
    lg[i] = pos ? T{1} : slope;
  }
  return Unary(x, std::move(out), std::move(lg));
}

template <typename T>
Var<T> Gelu(Var<T> x) {
  const Tensor<T>& xv = x.value();
  Tensor<T> out(xv.shape()), lg(xv.shape());
  const T inv_sqrt2 = T{1} / std::numbers::sqrt2_v<T>;
  const T inv_sqrt2pi = std::numbers::inv_sqrtpi_v<T> * inv_sqrt2;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const T v = xv[i];
    const T cdf = T{0.5} * (T{1} + std::erf(v * inv_sqrt2));
    out[i] = v * cdf;
    lg[i] = cdf + v * inv_sqrt2pi * std::exp(T{-0.5} * v * v);
  }
  return Unary(x, std::move(out), std::move(lg));
}

template <typename T>
Var<T> Softplus(Var<T> x, T offset) {
  const Tensor<T>& xv = x.value();
  Tensor<T> out(xv.shape()), lg(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const T v = xv[i];
    const T sp = v > T{20} ? v : std::log1p(std::exp(v));
    out[i] = sp + offset;
    lg[i] = T{1} / (T{1} + std::exp(-v));
  }
  return Unary(x, std::move(out), std::move(lg));
}

template <typename T>
Var<T> LayerNorm(Var<T> x, Var<T> gamma, Var<T> beta, T eps) {
  RequireSameTape(x, gamma);
  RequireSameTape(x, beta);
  const Shape& xs = x.shape();
  if (xs.empty()) throw ShapeError("layer_norm on scalar");
  const std::int64_t c = xs.back();
  if (gamma.shape() != Shape{c} || beta.shape() != Shape{c}) {
    throw ShapeError("layer_norm affine shape mismatch");
  }
  const std::int64_t rows = NumElements(xs) / c;
  const Tensor<T>& xv = x.value();
  const T* gm = gamma.value().data();
  const T* bt = beta.value().data();
  Tensor<T> out(xs), xhat(xs), rstd(Shape{rows});
  for (std::int64_t r = 0; r < rows; ++r) {
    const T* xr = xv.data() + r * c;
    T mean = 0;
    for (std::int64_t i = 0; i < c; ++i) mean += xr[i];
    mean /= static_cast<T>(c);
    T var = 0;
    for (std::int64_t i = 0; i < c; ++i) var += (xr[i] - mean) * (xr[i] - mean);
    var /= static_cast<T>(c);
    const T rs = T{1} / std::sqrt(var + eps);
    rstd[r] = rs;
    for (std::int64_t i = 0; i < c; ++i) {
      const T xh = (xr[i] - mean) * rs;
      xhat[r * c + i] = xh;
      out[r * c + i] = xh * gm[i] + bt[i];
    }
  }
  const bool rg =
      x.requires_grad() || gamma.requires_grad() || beta.requires_grad();
  const std::size_t xid = x.id, gid = gamma.id, bid = beta.id;
  return x.tape->Record(
      std::move(out), rg,
      [=, xhat = std::move(xhat), rstd = std::move(rstd)](Tape<T>& tape,
                                                          std::size_t self) {
        const Tensor<T>& dout = tape.GradRef(self);
        const T* gm = tape.value(gid).data();
        if (tape.requires_grad(gid) || tape.requires_grad(bid)) {
          Tensor<T> dg(Shape{c}), db(Shape{c});
          for (std::int64_t r = 0; r < rows; ++r) {
            for (std::int64_t i = 0; i < c; ++i) {
              dg[i] += dout[r * c + i] * xhat[r * c + i];
              db[i] += dout[r * c + i];
            }
          }
          tape.Accumulate(gid, dg);
          tape.Accumulate(bid, db);
        }
        if (tape.requires_grad(xid)) {
          Tensor<T> dx(xhat.shape());
          for (std::int64_t r = 0; r < rows; ++r) {
            T mean_d = 0, mean_dx = 0;
            for (std::int64_t i = 0; i < c; ++i) {
              const T d = dout[r * c + i] * gm[i];
              mean_d += d;
              mean_dx += d * xhat[r * c + i];
            }
            mean_d /= static_cast<T>(c);
            mean_dx /= static_cast<T>(c);
            for (std::int64_t i = 0; i < c; ++i) {
              const T d = dout[r * c + i] * gm[i];
              dx[r * c + i] =
                  rstd[r] * (d - mean_d - xhat[r * c + i] * mean_dx);
            }
          }
          tape.Accumulate(xid, dx);
        }
      });
}

namespace {

struct AttnDims {
  std::int64_t batch, tokens, channels, heads, head_dim;
};

AttnDims CheckAttention(const Shape& s, int heads) {
  RequireRank(s, 3, "self_attention input");
  if (heads <= 0 || s[2] % 3 != 0) throw ShapeError("self_attention packing");
  const std::int64_t c = s[2] / 3;
  if (c % heads != 0) {
    throw ShapeError("channels " + std::to_string(c) +
                     " not divisible by heads " + std::to_string(heads));
  }
  return {s[0], s[1], c, heads, c / heads};
}

// Probabilities P[b,h,t,u] of token t attending to u.
template <typename T>
Tensor<T> ComputeProbabilities(const Tensor<T>& qkv, const AttnDims& d) {
  const std::int64_t tt = d.tokens, hd = d.head_dim, stride = 3 * d.channels;
  const T scale = T{1} / std::sqrt(static_cast<T>(hd));
  Tensor<T> p(Shape{d.batch, d.heads, tt, tt});
  std::vector<T> row(tt);
  for (std::int64_t b = 0; b < d.batch; ++b) {
    const T* base = qkv.data() + b * tt * stride;
    for (std::int64_t h = 0; h < d.heads; ++h) {
      T* ph = p.data() + (b * d.heads + h) * tt * tt;
      for (std::int64_t t = 0; t < tt; ++t) {
        const T* q = base + t * stride + h * hd;
        T mx = -std::numeric_limits<T>::infinity();
        for (std::int64_t u = 0; u < tt; ++u) {
          const T* k = base + u * stride + d.channels + h * hd;
          T dot = 0;
          for (std::int64_t i = 0; i < hd; ++i) dot += q[i] * k[i];
          row[u] = dot * scale;
          mx = std::max(mx, row[u]);
        }
        T sum = 0;
        for (std::int64_t u = 0; u < tt; ++u) {
          row[u] = std::exp(row[u] - mx);
          sum += row[u];
        }
        for (std::int64_t u = 0; u < tt; ++u) ph[t * tt + u] = row[u] / sum;
      }
    }
  }
  return p;
}

}  // namespace

template <typename T>
Tensor<T> AttentionProbabilities(const Tensor<T>& qkv, int heads) {
  return ComputeProbabilities(qkv, CheckAttention(qkv.shape(), heads));
}

template <typename T>
Var<T> SelfAttention(Var<T> qkv, int heads) {
  const AttnDims d = CheckAttention(qkv.shape(), heads);
  const Tensor<T>& in = qkv.value();
  Tensor<T> probs = ComputeProbabilities(in, d);
  const std::int64_t tt = d.tokens, hd = d.head_dim, c = d.channels;
  const std::int64_t stride = 3 * c;
  Tensor<T> out(Shape{d.batch, tt, c});
  for (std::int64_t b = 0; b < d.batch; ++b) {
    const T* base = in.data() + b * tt * stride;
    for (std::int64_t h = 0; h < d.heads; ++h) {
      const T* ph = probs.data() + (b * d.heads + h) * tt * tt;
      for (std::int64_t t = 0; t < tt; ++t) {
        T* o = out.data() + (b * tt + t) * c + h * hd;
        for (std::int64_t u = 0; u < tt; ++u) {
          const T pw = ph[t * tt + u];
          const T* v = base + u * stride + 2 * c + h * hd;
          for (std::int64_t i = 0; i < hd; ++i) o[i] += pw * v[i];
        }
      }
    }
  }
  const std::size_t id = qkv.id;
  return qkv.tape->Record(
      std::move(out), qkv.requires_grad(),
      [=, probs = std::move(probs)](Tape<T>& tape, std::size_t self) {
        const Tensor<T>& dout = tape.GradRef(self);
        const Tensor<T>& in = tape.value(id);
        const T scale = T{1} / std::sqrt(static_cast<T>(hd));
        Tensor<T> dqkv(in.shape());
        std::vector<T> dp(tt), ds(tt);
        for (std::int64_t b = 0; b < d.batch; ++b) {
          const T* base = in.data() + b * tt * stride;
          T* dbase = dqkv.data() + b * tt * stride;
          for (std::int64_t h = 0; h < d.heads; ++h) {
            const T* ph = probs.data() + (b * d.heads + h) * tt * tt;
            for (std::int64_t t = 0; t < tt; ++t) {
              const T* go = dout.data() + (b * tt + t) * c + h * hd;
              // dP[t,u] = dO[t] . V[u];  dV[u] += P[t,u] dO[t]
              T dot_pd = 0;
              for (std::int64_t u = 0; u < tt; ++u) {
                const T* v = base + u * stride + 2 * c + h * hd;
                T* dv = dbase + u * stride + 2 * c + h * hd;
                const T pw = ph[t * tt + u];
                T acc = 0;
                for (std::int64_t i = 0; i < hd; ++i) {
                  acc += go[i] * v[i];
                  dv[i] += pw * go[i];
                }
                dp[u] = acc;
                dot_pd += acc * pw;
              }
              for (std::int64_t u = 0; u < tt; ++u) {
                ds[u] = ph[t * tt + u] * (dp[u] - dot_pd) * scale;
              }
              const T* q = base + t * stride + h * hd;
              T* dq = dbase + t * stride + h * hd;
              for (std::int64_t u = 0; u < tt; ++u) {
                const T* k = base + u * stride + c + h * hd;
                T* dk = dbase + u * stride + c + h * hd;
                for (std::int64_t i = 0; i < hd; ++i) {
                  dq[i] += ds[u] * k[i];
                  dk[i] += ds[u] * q[i];
                }
              }
            }
          }
        }
        tape.Accumulate(id, dqkv);
      });
}

template <typename T>
Var<T> Add(Var<T> a, Var<T> b) {
  RequireSameTape(a, b);
  const Shape& as = a.shape();
  const Shape& bs = b.shape();
  if (bs.size() > as.size() ||
      !std::equal(bs.begin(), bs.end(), as.end() - bs.size())) {
    throw ShapeError("add: " + ShapeToString(bs) + " does not broadcast to " +
                     ShapeToString(as));
  }
  const std::size_t n = a.value().size(), m = b.value().size();
  Tensor<T> out = a.value();
  const T* bv = b.value().data();
  for (std::size_t i = 0; i < n; ++i) out[i] += bv[i % m];
  const std::size_t aid = a.id, bid = b.id;
  return a.tape->Record(
      std::move(out), a.requires_grad() || b.requires_grad(),
      [=](Tape<T>& tape, std::size_t self) {
        const Tensor<T>& dout = tape.GradRef(self);
        tape.Accumulate(aid, dout);
        if (tape.requires_grad(bid)) {
          Tensor<T> db(tape.value(bid).shape());
          for (std::size_t i = 0; i < n; ++i) db[i % m] += dout[i];
          tape.Accumulate(bid, db);
        }
      });
}

template <typename T>
Var<T> Mul(Var<T> a, Var<T> b) {
  RequireSameTape(a, b);
  if (a.shape() != b.shape()) throw ShapeError("mul: shape mismatch");
  Tensor<T> out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  const std::size_t aid = a.id, bid = b.id;
  return a.tape->Record(
      std::move(out), a.requires_grad() || b.requires_grad(),
      [=](Tape<T>& tape, std::size_t self) {
        const Tensor<T>& dout = tape.GradRef(self);
        Tensor<T> da = dout, db = dout;
        for (std::size_t i = 0; i < dout.size(); ++i) {
          da[i] *= tape.value(bid)[i];
          db[i] *= tape.value(aid)[i];
        }
        tape.Accumulate(aid, da);
        tape.Accumulate(bid, db);
      });
}

template <typename T>
Var<T> Scale(Var<T> x, T s) {
  Tensor<T> out = x.value();
  for (auto& v : out.values()) v *= s;
  const std::size_t xid = x.id;
  return x.tape->Record(std::move(out), x.requires_grad(),
                        [=](Tape<T>& tape, std::size_t self) {
                          Tensor<T> dx = tape.GradRef(self);
                          for (auto& v : dx.values()) v *= s;
                          tape.Accumulate(xid, dx);
                        });
}

template <typename T>
Var<T> AddConstant(Var<T> x, const Tensor<T>& c) {
  if (x.shape() != c.shape()) throw ShapeError("add_constant: shape mismatch");
  Tensor<T> out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += c[i];
  const std::size_t xid = x.id;
  return x.tape->Record(std::move(out), x.requires_grad(),
                        [=](Tape<T>& tape, std::size_t self) {
                          tape.Accumulate(xid, tape.GradRef(self));
                        });
}

template <typename T>
Var<T> Sum(Var<T> x) {
  T s = 0;
  for (T v : x.value().values()) s += v;
  const std::size_t xid = x.id;
  return x.tape->Record(Tensor<T>::Scalar(s), x.requires_grad(),
                        [=](Tape<T>& tape, std::size_t self) {
                          const T g = tape.GradRef(self)[0];
                          tape.Accumulate(
                              xid, Tensor<T>(tape.value(xid).shape(), g));
                        });
}

template <typename T>
Var<T> Reshape(Var<T> x, Shape shape) {
  Tensor<T> out = x.value().Reshaped(std::move(shape));
  const std::size_t xid = x.id;
  return x.tape->Record(std::move(out), x.requires_grad(),
                        [=](Tape<T>& tape, std::size_t self) {
                          tape.Accumulate(xid, tape.GradRef(self));
                        });
}

template <typename T>
Var<T> ConcatLast(std::span<const Var<T>> parts) {
  if (parts.empty()) throw ShapeError("concat of nothing");
  Shape lead = parts[0].shape();
  lead.pop_back();
  std::vector<std::int64_t> widths;
  std::vector<std::size_t> ids;
  std::int64_t total = 0;
  bool rg = false;
  for (const Var<T>& p : parts) {
    RequireSameTape(parts[0], p);
    Shape s = p.shape();
    const std::int64_t width = s.back();
    s.pop_back();
    if (s != lead) throw ShapeError("concat: leading shapes differ");
    widths.push_back(width);
    ids.push_back(p.id);
    total += width;
    rg = rg || p.requires_grad();
  }
  Shape os = lead;
  os.push_back(total);
  const std::int64_t rows = NumElements(lead);
  Tensor<T> out(os);
  std::int64_t off = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const T* src = parts[k].value().data();
    for (std::int64_t r = 0; r < rows; ++r) {
      std::copy(src + r * widths[k], src + (r + 1) * widths[k],
                out.data() + r * total + off);
    }
    off += widths[k];
  }
  return parts[0].tape->Record(
      std::move(out), rg, [=](Tape<T>& tape, std::size_t self) {
        const Tensor<T>& dout = tape.GradRef(self);
        std::int64_t off = 0;
        for (std::size_t k = 0; k < ids.size(); ++k) {
          if (tape.requires_grad(ids[k])) {
            Tensor<T> d(tape.value(ids[k]).shape());
            for (std::int64_t r = 0; r < rows; ++r) {
              const T* s = dout.data() + r * total + off;
              std::copy(s, s + widths[k], d.data() + r * widths[k]);
            }
            tape.Accumulate(ids[k], d);
          }
          off += widths[k];
        }
      });
}

template <typename T>
Var<T> SliceLast(Var<T> x, std::int64_t begin, std::int64_t length) {
  const Shape& xs = x.shape();
  if (xs.empty() || begin < 0 || length <= 0 || begin + length > xs.back()) {
    throw ShapeError("slice_last out of range");
  }
  const std::int64_t width = xs.back();
  const std::int64_t rows = NumElements(xs) / width;
  Shape os = xs;
  os.back() = length;
  Tensor<T> out(os);
  for (std::int64_t r = 0; r < rows; ++r) {
    const T* s = x.value().data() + r * width + begin;
    std::copy(s, s + length, out.data() + r * length);
  }
  const std::size_t xid = x.id;
  return x.tape->Record(
      std::move(out), x.requires_grad(), [=](Tape<T>& tape, std::size_t self) {
        const Tensor<T>& dout = tape.GradRef(self);
        Tensor<T> dx(tape.value(xid).shape());
        for (std::int64_t r = 0; r < rows; ++r) {
          std::copy(dout.data() + r * length, dout.data() + (r + 1) * length,
                    dx.data() + r * width + begin);
        }
        tape.Accumulate(xid, dx);
      });
}

template <typename T>
Var<T> PrependToken(Var<T> seq, Var<T> token) {
  RequireSameTape(seq, token);
  const Shape& ss = seq.shape();
  RequireRank(ss, 3, "prepend_token sequence");
  const std::int64_t batch = ss[0], tt = ss[1], c = ss[2];
  if (token.value().size() != static_cast<std::size_t>(c)) {
    throw ShapeError("prepend_token: token width mismatch");
  }
  Tensor<T> out(Shape{batch, tt + 1, c});
  for (std::int64_t b = 0; b < batch; ++b) {
    T* o = out.data() + b * (tt + 1) * c;
    std::copy(token.value().data(), token.value().data() + c, o);
    const T* s = seq.value().data() + b * tt * c;
    std::copy(s, s + tt * c, o + c);
  }
  const std::size_t sid = seq.id, tid = token.id;
  return seq.tape->Record(
      std::move(out), seq.requires_grad() || token.requires_grad(),
      [=](Tape<T>& tape, std::size_t self) {
        const Tensor<T>& dout = tape.GradRef(self);
        Tensor<T> ds(Shape{batch, tt, c});
        Tensor<T> dt(tape.value(tid).shape());
        for (std::int64_t b = 0; b < batch; ++b) {
          const T* g = dout.data() + b * (tt + 1) * c;
          for (std::int64_t i = 0; i < c; ++i) dt[i] += g[i];
          std::copy(g + c, g + (tt + 1) * c, ds.data() + b * tt * c);
        }
        tape.Accumulate(sid, ds);
        tape.Accumulate(tid, dt);
      });
}

template <typename T>
Var<T> SliceTokens(Var<T> seq, std::int64_t begin, std::int64_t count) {
  const Shape& ss = seq.shape();
  RequireRank(ss, 3, "slice_tokens");
  const std::int64_t batch = ss[0], tt = ss[1], c = ss[2];
  if (begin < 0 || count <= 0 || begin + count > tt) {
    throw ShapeError("slice_tokens out of range");
  }
  Tensor<T> out(Shape{batch, count, c});
  for (std::int64_t b = 0; b < batch; ++b) {
    const T* s = seq.value().data() + (b * tt + begin) * c;
    std::copy(s, s + count * c, out.data() + b * count * c);
  }
  const std::size_t sid = seq.id;
  return seq.tape->Record(
      std::move(out), seq.requires_grad(),
      [=](Tape<T>& tape, std::size_t self) {
        const Tensor<T>& dout = tape.GradRef(self);
        Tensor<T> ds(Shape{batch, tt, c});
        for (std::int64_t b = 0; b < batch; ++b) {
          const T* g = dout.data() + b * count * c;
          std::copy(g, g + count * c, ds.data() + (b * tt + begin) * c);
        }
        tape.Accumulate(sid, ds);
      });
}

namespace {

// Copies the window [top, top+oh) x [left, left+ow) of `src` (sh x sw) into
// `dst` (dh x dw) at offset (dy, dx).
template <typename T>
void CopyWindow(const T* src, std::int64_t sw, std::int64_t sy0,
                std::int64_t sx0, T* dst, std::int64_t dw, std::int64_t dy0,
                std::int64_t dx0, std::int64_t rows, std::int64_t cols,
                std::int64_t c) {
  for (std::int64_t y = 0; y < rows; ++y) {
    const T* s = src + ((sy0 + y) * sw + sx0) * c;
    T* d = dst + ((dy0 + y) * dw + dx0) * c;
    std::copy(s, s + cols * c, d);
  }
}

}  // namespace

template <typename T>
Var<T> PadSpatial(Var<T> x, int top, int bottom, int left, int right) {
  const Shape& xs = x.shape();
  RequireRank(xs, 4, "pad_spatial");
  if (top < 0 || bottom < 0 || left < 0 || right < 0) {
    throw ShapeError("negative padding");
  }
  const std::int64_t batch = xs[0], h = xs[1], w = xs[2], c = xs[3];
  const std::int64_t oh = h + top + bottom, ow = w + left + right;
  Tensor<T> out(Shape{batch, oh, ow, c});
  for (std::int64_t b = 0; b < batch; ++b) {
    CopyWindow(x.value().data() + b * h * w * c, w, 0, 0,
               out.data() + b * oh * ow * c, ow, top, left, h, w, c);
  }
  const std::size_t xid = x.id;
  return x.tape->Record(
      std::move(out), x.requires_grad(), [=](Tape<T>& tape, std::size_t self) {
        const Tensor<T>& dout = tape.GradRef(self);
        Tensor<T> dx(Shape{batch, h, w, c});
        for (std::int64_t b = 0; b < batch; ++b) {
          CopyWindow(dout.data() + b * oh * ow * c, ow, top, left,
                     dx.data() + b * h * w * c, w, 0, 0, h, w, c);
        }
        tape.Accumulate(xid, dx);
      });
}

template <typename T>
Var<T> CropSpatial(Var<T> x, int top, int bottom, int left, int right) {
  const Shape& xs = x.shape();
  RequireRank(xs, 4, "crop_spatial");
  const std::int64_t batch = xs[0], h = xs[1], w = xs[2], c = xs[3];
  const std::int64_t oh = h - top - bottom, ow = w - left - right;
  if (top < 0 || bottom < 0 || left < 0 || right < 0 || oh <= 0 || ow <= 0) {
    throw ShapeError("invalid crop");
  }
  Tensor<T> out(Shape{batch, oh, ow, c});
  for (std::int64_t b = 0; b < batch; ++b) {
    CopyWindow(x.value().data() + b * h * w * c, w, top, left,
               out.data() + b * oh * ow * c, ow, 0, 0, oh, ow, c);
  }
  const std::size_t xid = x.id;
  return x.tape->Record(
      std::move(out), x.requires_grad(), [=](Tape<T>& tape, std::size_t self) {
        const Tensor<T>& dout = tape.GradRef(self);
        Tensor<T> dx(Shape{batch, h, w, c});
        for (std::int64_t b = 0; b < batch; ++b) {
          CopyWindow(dout.data() + b * oh * ow * c, ow, 0, 0,
                     dx.data() + b * h * w * c, w, top, left, oh, ow, c);
        }
        tape.Accumulate(xid, dx);
      });
}

template <typename T>
Var<T> AffineChannels(Var<T> x, std::span<const T> scale,
                      std::span<const T> shift) {
  const Shape& xs = x.shape();
  const std::size_t c = scale.size();
  if (xs.empty() || static_cast<std::size_t>(xs.back()) != c ||
      shift.size() != c) {
    throw ShapeError("affine_channels: channel mismatch");
  }
  Tensor<T> out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = out[i] * scale[i % c] + shift[i % c];
  }
  std::vector<T> sc(scale.begin(), scale.end());
  const std::size_t xid = x.id;
  return x.tape->Record(std::move(out), x.requires_grad(),
                        [=](Tape<T>& tape, std::size_t self) {
                          Tensor<T> dx = tape.GradRef(self);
                          for (std::size_t i = 0; i < dx.size(); ++i) {
                            dx[i] *= sc[i % c];
                          }
                          tape.Accumulate(xid, dx);
                        });
}

template <typename T>
Var<T> MeanSquaredError(Var<T> x, const Tensor<T>& target) {
  if (x.shape() != target.shape()) throw ShapeError("mse: shape mismatch");
  const Tensor<T>& xv = x.value();
  const T n = static_cast<T>(xv.size());
  Tensor<T> diff(xv.shape());
  T acc = 0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    diff[i] = xv[i] - target[i];
    acc += diff[i] * diff[i];
  }
  const std::size_t xid = x.id;
  return x.tape->Record(
      Tensor<T>::Scalar(acc / n), x.requires_grad(),
      [=, diff = std::move(diff)](Tape<T>& tape, std::size_t self) {
        const T g = tape.GradRef(self)[0] * T{2} / n;
        Tensor<T> dx = diff;
        for (auto& v : dx.values()) v *= g;
        tape.Accumulate(xid, dx);
      });
}

template <typename T>
Var<T> SoftmaxCrossEntropy(Var<T> logits, std::span<const int> labels) {
  const Shape& ls = logits.shape();
  RequireRank(ls, 2, "softmax_cross_entropy");
  const std::int64_t batch = ls[0], k = ls[1];
  if (static_cast<std::int64_t>(labels.size()) != batch) {
    throw ShapeError("softmax_cross_entropy: label count mismatch");
  }
  Tensor<T> probs = SoftmaxRows(logits.value());
  T loss = 0;
  for (std::int64_t b = 0; b < batch; ++b) {
    const int y = labels[b];
    if (y < 0 || y >= k) throw std::out_of_range("label out of range");
    // log-sum-exp form keeps the loss finite when p underflows.
    const T* z = logits.value().data() + b * k;
    const T mx = *std::max_element(z, z + k);
    T s = 0;
    for (std::int64_t i = 0; i < k; ++i) s += std::exp(z[i] - mx);
    loss += std::log(s) + mx - z[y];
  }
  loss /= static_cast<T>(batch);
  std::vector<int> ys(labels.begin(), labels.end());
  const std::size_t lid = logits.id;
  return logits.tape->Record(
      Tensor<T>::Scalar(loss), logits.requires_grad(),
      [=, probs = std::move(probs)](Tape<T>& tape, std::size_t self) {
        const T g = tape.GradRef(self)[0] / static_cast<T>(batch);
        Tensor<T> d = probs;
        for (std::int64_t b = 0; b < batch; ++b) d[b * k + ys[b]] -= T{1};
        for (auto& v : d.values()) v *= g;
        tape.Accumulate(lid, d);
      });
}

template <typename T>
std::vector<T> Softmax(std::span<const T> x) {
  std::vector<T> out(x.begin(), x.end());
  if (out.empty()) return out;
  const T mx = *std::max_element(out.begin(), out.end());
  T sum = 0;
  for (auto& v : out) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (auto& v : out) v /= sum;
  return out;
}

template <typename T>
Tensor<T> SoftmaxRows(const Tensor<T>& x) {
  if (x.rank() == 0) throw ShapeError("softmax of scalar");
  const std::int64_t k = x.shape().back();
  const std::int64_t rows = NumElements(x.shape()) / k;
  Tensor<T> out(x.shape());
  for (std::int64_t r = 0; r < rows; ++r) {
    auto p = Softmax<T>(std::span<const T>(x.data() + r * k, k));
    std::copy(p.begin(), p.end(), out.data() + r * k);
  }
  return out;
}

#define ECAT_INSTANTIATE_OPS(T)                                              \
  template Var<T> Conv2d(Var<T>, Var<T>, Var<T>, const ConvGeometry&);       \
  template Var<T> Deconv2d(Var<T>, Var<T>, Var<T>, const ConvGeometry&);     \
  template Var<T> Linear(Var<T>, Var<T>, Var<T>);                            \
  template Var<T> LeakyRelu(Var<T>, T);                                      \
  template Var<T> Gelu(Var<T>);                                              \
  template Var<T> Softplus(Var<T>, T);                                       \
  template Var<T> LayerNorm(Var<T>, Var<T>, Var<T>, T);                      \
  template Var<T> SelfAttention(Var<T>, int);                                \
  template Tensor<T> AttentionProbabilities(const Tensor<T>&, int);          \
  template Var<T> Add(Var<T>, Var<T>);                                       \
  template Var<T> Mul(Var<T>, Var<T>);                                       \
  template Var<T> Scale(Var<T>, T);                                          \
  template Var<T> AddConstant(Var<T>, const Tensor<T>&);                     \
  template Var<T> Sum(Var<T>);                                               \
  template Var<T> Reshape(Var<T>, Shape);                                    \
  template Var<T> ConcatLast(std::span<const Var<T>>);                       \
  template Var<T> SliceLast(Var<T>, std::int64_t, std::int64_t);             \
  template Var<T> PrependToken(Var<T>, Var<T>);                              \
  template Var<T> SliceTokens(Var<T>, std::int64_t, std::int64_t);           \
  template Var<T> PadSpatial(Var<T>, int, int, int, int);                    \
  template Var<T> CropSpatial(Var<T>, int, int, int, int);                   \
  template Var<T> AffineChannels(Var<T>, std::span<const T>,                 \
                                 std::span<const T>);                        \
  template Var<T> MeanSquaredError(Var<T>, const Tensor<T>&);                \
  template Var<T> SoftmaxCrossEntropy(Var<T>, std::span<const int>);         \
  template std::vector<T> Softmax(std::span<const T>);                       \
  template Tensor<T> SoftmaxRows(const Tensor<T>&);

ECAT_INSTANTIATE_OPS(float)
ECAT_INSTANTIATE_OPS(double)

#undef ECAT_INSTANTIATE_OPS

}  // namespace ecat::nn
