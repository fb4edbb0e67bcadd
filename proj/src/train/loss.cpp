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

#include "ecat/train/loss.hpp"

#include <cmath>
#include <sstream>

namespace ecat::train {

template <typename T>
LossTerms<T> JointLoss(nn::Tape<T>& tape, Model<T>& model,
                       const nn::Tensor<T>& x01, std::span<const int> labels,
                       const LossWeights& weights, nn::Rng* noise) {
  if (!(weights.alpha >= 0.0) || !(weights.beta >= 0.0)) {
    throw std::invalid_argument("loss weights must be non-negative");
  }
  const ForwardOutputs<T> out =
      model.Forward(tape, x01, weights.stage, noise);

  LossTerms<T> terms;
  terms.ce = nn::SoftmaxCrossEntropy(out.logits, labels);
  terms.mse = nn::Scale(nn::MeanSquaredError(out.recon, x01),
                        static_cast<T>(kPixelScale * kPixelScale));
  if (out.rate_bits) {
    const double pixels = static_cast<double>(x01.dim(0)) *
                          static_cast<double>(x01.dim(1) * x01.dim(2));
    terms.rate = nn::Scale(*out.rate_bits, static_cast<T>(1.0 / pixels));
  } else {
    terms.rate = tape.Constant(nn::Tensor<T>::Scalar(T{0}));
  }
  terms.total = nn::Add(
      nn::Add(nn::Scale(terms.ce, static_cast<T>(weights.alpha)),
              nn::Scale(terms.mse, static_cast<T>(weights.beta))),
      terms.rate);

  const double parts[4] = {terms.total_value(), terms.ce_value(),
                           terms.mse_value(), terms.rate_value()};
  for (double v : parts) {
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "non-finite loss: total=" << parts[0] << " ce=" << parts[1]
         << " mse=" << parts[2] << " rate=" << parts[3];
      throw nn::NonFiniteError(os.str());
    }
  }
  return terms;
}

template LossTerms<float> JointLoss(nn::Tape<float>&, Model<float>&,
                                    const nn::Tensor<float>&,
                                    std::span<const int>, const LossWeights&,
                                    nn::Rng*);
template LossTerms<double> JointLoss(nn::Tape<double>&, Model<double>&,
                                     const nn::Tensor<double>&,
                                     std::span<const int>, const LossWeights&,
                                     nn::Rng*);

}  // namespace ecat::train
