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

// Rate-distortion-accuracy objective
//
//   total = alpha * ce + beta * mse + rate
//
//   ce   : mean softmax cross-entropy over the batch, in nats
//   mse  : mean squared error on the 8-bit pixel scale, i.e.
//          255^2 * mean((x_hat - x)^2) with x in [0,1]
//   rate : coded bits per pixel, averaged over the batch (0 in pretraining)

#ifndef ECAT_TRAIN_LOSS_HPP_
#define ECAT_TRAIN_LOSS_HPP_

#include <span>

#include "ecat/model/model.hpp"

namespace ecat::train {

inline constexpr double kPixelScale = 255.0;

struct LossWeights {
  double alpha = 1.0;
  double beta = 0.001;
  Stage stage = Stage::kPretrain;
};

template <typename T>
struct LossTerms {
  nn::Var<T> total;
  nn::Var<T> ce;
  nn::Var<T> mse;
  nn::Var<T> rate;  // constant 0 in pretraining

  double total_value() const { return total.value()[0]; }
  double ce_value() const { return ce.value()[0]; }
  double mse_value() const { return mse.value()[0]; }
  double rate_value() const { return rate.value()[0]; }
};

// Throws std::invalid_argument for negative weights or bad labels and
// nn::NonFiniteError if any term is not finite.
template <typename T>
LossTerms<T> JointLoss(nn::Tape<T>& tape, Model<T>& model,
                       const nn::Tensor<T>& x01, std::span<const int> labels,
                       const LossWeights& weights, nn::Rng* noise);

}  // namespace ecat::train

#endif  // ECAT_TRAIN_LOSS_HPP_
