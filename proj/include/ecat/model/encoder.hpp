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

#ifndef ECAT_MODEL_ENCODER_HPP_
#define ECAT_MODEL_ENCODER_HPP_

#include <array>
#include <cstdint>

#include "ecat/model/config.hpp"
#include "ecat/nn/layers.hpp"

namespace ecat {

inline constexpr double kLeakySlope = 0.01;

// Analysis transform: four stride-2 5x5 convolutions with widths
// [N, N, N, M]; LeakyReLU after the first three. Output is H/16 x W/16 x M,
// signed and unbounded.
template <typename T>
class AnalysisTransform {
 public:
  AnalysisTransform() = default;
  explicit AnalysisTransform(const ModelConfig& cfg);

  void Init(nn::Rng& rng);

  // x: [B,H,W,3] normalized image; H and W must be multiples of 16.
  nn::Var<T> operator()(nn::Tape<T>& tape, nn::Var<T> x);

  template <typename F>
  void Visit(F&& f) {
    for (auto& l : layers_) l.Visit(f);
  }

 private:
  std::array<nn::Conv2dLayer<T>, 4> layers_;
};

enum class QuantizerMode { kAdditiveNoise, kRound };

// i.i.d. U(-1/2, 1/2) samples.
template <typename T>
nn::Tensor<T> UniformNoise(const nn::Shape& shape, nn::Rng& rng);

// Training relaxation: z + u. The gradient passes through unchanged.
template <typename T>
nn::Var<T> QuantizeTrain(nn::Var<T> z, nn::Rng& rng);

// Rounds half away from zero.
template <typename T>
nn::Tensor<T> QuantizeEval(const nn::Tensor<T>& z);

template <typename T>
nn::Tensor<std::int32_t> QuantizeToSymbols(const nn::Tensor<T>& z);

}  // namespace ecat

#endif  // ECAT_MODEL_ENCODER_HPP_
