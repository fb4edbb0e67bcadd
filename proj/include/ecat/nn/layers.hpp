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

// Parameter-owning layer wrappers. Each layer exposes Visit(), which walks
// its parameters in a fixed order; that order defines checkpoint layout and
// optimizer state alignment.

#ifndef ECAT_NN_LAYERS_HPP_
#define ECAT_NN_LAYERS_HPP_

#include <cmath>
#include <string>

#include "ecat/nn/ops.hpp"
#include "ecat/nn/rng.hpp"
#include "ecat/nn/tape.hpp"

namespace ecat::nn {

template <typename T>
class Conv2dLayer {
 public:
  Conv2dLayer() = default;
  Conv2dLayer(const std::string& name, int cin, int cout, ConvGeometry g)
      : geometry_(g),
        weight_(name + ".weight", Tensor<T>(Shape{cout, g.kernel, g.kernel, cin})),
        bias_(name + ".bias", Tensor<T>(Shape{cout})) {}

  // He-normal for layers followed by LeakyReLU, gain 1 otherwise.
  void Init(Rng& rng, bool activated) {
    const Shape& s = weight_.value.shape();
    const double fan_in = static_cast<double>(s[1] * s[2] * s[3]);
    const double stddev = std::sqrt((activated ? 2.0 : 1.0) / fan_in);
    for (auto& v : weight_.value.values()) v = static_cast<T>(rng.Normal() * stddev);
    bias_.value.Fill(T{0});
  }

  Var<T> operator()(Tape<T>& tape, Var<T> x) {
    return Conv2d(x, tape.Param(weight_), tape.Param(bias_), geometry_);
  }

  template <typename F>
  void Visit(F&& f) {
    f(weight_);
    f(bias_);
  }

  Parameter<T>& weight() { return weight_; }
  Parameter<T>& bias() { return bias_; }
  const ConvGeometry& geometry() const { return geometry_; }

 private:
  ConvGeometry geometry_;
  Parameter<T> weight_;
  Parameter<T> bias_;
};

template <typename T>
class Deconv2dLayer {
 public:
  Deconv2dLayer() = default;
  Deconv2dLayer(const std::string& name, int cin, int cout, ConvGeometry g)
      : geometry_(g),
        weight_(name + ".weight", Tensor<T>(Shape{cin, g.kernel, g.kernel, cout})),
        bias_(name + ".bias", Tensor<T>(Shape{cout})) {}

  void Init(Rng& rng, bool activated) {
    const Shape& s = weight_.value.shape();
    // Each output pixel sees about cin*k*k/stride^2 taps.
    const double fan_in = static_cast<double>(s[0] * s[1] * s[2]) /
                          (geometry_.stride * geometry_.stride);
    const double stddev = std::sqrt((activated ? 2.0 : 1.0) / fan_in);
    for (auto& v : weight_.value.values()) v = static_cast<T>(rng.Normal() * stddev);
    bias_.value.Fill(T{0});
  }

  Var<T> operator()(Tape<T>& tape, Var<T> x) {
    return Deconv2d(x, tape.Param(weight_), tape.Param(bias_), geometry_);
  }

  template <typename F>
  void Visit(F&& f) {
    f(weight_);
    f(bias_);
  }

  Parameter<T>& weight() { return weight_; }
  Parameter<T>& bias() { return bias_; }

 private:
  ConvGeometry geometry_;
  Parameter<T> weight_;
  Parameter<T> bias_;
};

// Affine map over the channel axis; also serves as a 1x1 convolution.
template <typename T>
class LinearLayer {
 public:
  LinearLayer() = default;
  LinearLayer(const std::string& name, int cin, int cout)
      : weight_(name + ".weight", Tensor<T>(Shape{cout, cin})),
        bias_(name + ".bias", Tensor<T>(Shape{cout})) {}

  void InitTruncNormal(Rng& rng, double stddev) {
    for (auto& v : weight_.value.values()) v = static_cast<T>(rng.TruncatedNormal(stddev));
    bias_.value.Fill(T{0});
  }

  void InitFanIn(Rng& rng) {
    const double stddev = 1.0 / std::sqrt(static_cast<double>(weight_.value.dim(1)));
    for (auto& v : weight_.value.values()) v = static_cast<T>(rng.Normal() * stddev);
    bias_.value.Fill(T{0});
  }

  Var<T> operator()(Tape<T>& tape, Var<T> x) {
    return Linear(x, tape.Param(weight_), tape.Param(bias_));
  }

  template <typename F>
  void Visit(F&& f) {
    f(weight_);
    f(bias_);
  }

  Parameter<T>& weight() { return weight_; }
  Parameter<T>& bias() { return bias_; }

 private:
  Parameter<T> weight_;
  Parameter<T> bias_;
};

template <typename T>
class LayerNormLayer {
 public:
  static constexpr double kEps = 1e-6;

  LayerNormLayer() = default;
  LayerNormLayer(const std::string& name, int channels)
      : gamma_(name + ".gamma", Tensor<T>(Shape{channels}, T{1})),
        beta_(name + ".beta", Tensor<T>(Shape{channels})) {}

  Var<T> operator()(Tape<T>& tape, Var<T> x) {
    return LayerNorm(x, tape.Param(gamma_), tape.Param(beta_),
                     static_cast<T>(kEps));
  }

  template <typename F>
  void Visit(F&& f) {
    f(gamma_);
    f(beta_);
  }

 private:
  Parameter<T> gamma_;
  Parameter<T> beta_;
};

}  // namespace ecat::nn

#endif  // ECAT_NN_LAYERS_HPP_
