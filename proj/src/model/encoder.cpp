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

#include "ecat/model/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ecat {

using nn::ConvGeometry;

template <typename T>
AnalysisTransform<T>::AnalysisTransform(const ModelConfig& cfg) {
  const ConvGeometry g{5, 2, 2, 0};
  const int n = cfg.channels_n, m = cfg.channels_m;
  layers_[0] = nn::Conv2dLayer<T>("encoder.conv0", 3, n, g);
  layers_[1] = nn::Conv2dLayer<T>("encoder.conv1", n, n, g);
  layers_[2] = nn::Conv2dLayer<T>("encoder.conv2", n, n, g);
  layers_[3] = nn::Conv2dLayer<T>("encoder.conv3", n, m, g);
}

template <typename T>
void AnalysisTransform<T>::Init(nn::Rng& rng) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i].Init(rng, i + 1 < layers_.size());
  }
}

template <typename T>
nn::Var<T> AnalysisTransform<T>::operator()(nn::Tape<T>& tape, nn::Var<T> x) {
  const nn::Shape& s = x.shape();
  if (s.size() != 4 || s[3] != 3) {
    throw nn::ShapeError("analysis transform expects [B,H,W,3], got " +
                         nn::ShapeToString(s));
  }
  if (s[1] % 16 != 0 || s[2] % 16 != 0) {
    throw nn::ShapeError("image size " + std::to_string(s[1]) + "x" +
                         std::to_string(s[2]) + " is not a multiple of 16");
  }
  nn::Var<T> h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i](tape, h);
    if (i + 1 < layers_.size()) h = nn::LeakyRelu(h, static_cast<T>(kLeakySlope));
  }
  return h;
}

template <typename T>
nn::Tensor<T> UniformNoise(const nn::Shape& shape, nn::Rng& rng) {
  // Open interval even after narrowing to T.
  const T hi = std::nextafter(T{0.5}, T{0});
  nn::Tensor<T> u(shape);
  for (auto& v : u.values()) {
    v = std::clamp(static_cast<T>(rng.Uniform() - 0.5), -hi, hi);
  }
  return u;
}

template <typename T>
nn::Var<T> QuantizeTrain(nn::Var<T> z, nn::Rng& rng) {
  return nn::AddConstant(z, UniformNoise<T>(z.shape(), rng));
}

template <typename T>
nn::Tensor<T> QuantizeEval(const nn::Tensor<T>& z) {
  nn::Tensor<T> out = z;
  for (auto& v : out.values()) v = std::round(v);
  return out;
}

template <typename T>
nn::Tensor<std::int32_t> QuantizeToSymbols(const nn::Tensor<T>& z) {
  nn::Tensor<std::int32_t> out(z.shape());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double r = std::round(static_cast<double>(z[i]));
    if (!(std::abs(r) < 1e9)) {
      throw nn::NonFiniteError("latent value out of symbol range");
    }
    out[i] = static_cast<std::int32_t>(r);
  }
  return out;
}

template class AnalysisTransform<float>;
template class AnalysisTransform<double>;
template nn::Tensor<float> UniformNoise(const nn::Shape&, nn::Rng&);
template nn::Tensor<double> UniformNoise(const nn::Shape&, nn::Rng&);
template nn::Var<float> QuantizeTrain(nn::Var<float>, nn::Rng&);
template nn::Var<double> QuantizeTrain(nn::Var<double>, nn::Rng&);
template nn::Tensor<float> QuantizeEval(const nn::Tensor<float>&);
template nn::Tensor<double> QuantizeEval(const nn::Tensor<double>&);
template nn::Tensor<std::int32_t> QuantizeToSymbols(const nn::Tensor<float>&);
template nn::Tensor<std::int32_t> QuantizeToSymbols(const nn::Tensor<double>&);

}  // namespace ecat
