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

#ifndef ECAT_ENTROPY_HYPERPRIOR_HPP_
#define ECAT_ENTROPY_HYPERPRIOR_HPP_

#include <array>

#include "ecat/model/config.hpp"
#include "ecat/nn/layers.hpp"

namespace ecat::entropy {

template <typename T>
struct GaussianParams {
  nn::Var<T> mu;
  nn::Var<T> sigma;
};

// Symmetric zero padding that brings a latent extent to a multiple of 4.
struct HyperPadding {
  int top = 0, bottom = 0, left = 0, right = 0;
  static HyperPadding For(int latent_h, int latent_w);
};

// Per-channel logistic prior of the hyper-latent.
template <typename T>
class FactorizedPrior {
 public:
  FactorizedPrior() = default;
  explicit FactorizedPrior(int channels);

  nn::Parameter<T>& loc() { return loc_; }
  nn::Parameter<T>& log_scale() { return log_scale_; }
  const nn::Parameter<T>& loc() const { return loc_; }
  const nn::Parameter<T>& log_scale() const { return log_scale_; }

  // Sum of -log2 P(h) over all elements of h ([..., N]).
  nn::Var<T> RateBits(nn::Tape<T>& tape, nn::Var<T> h);

  template <typename F>
  void Visit(F&& f) {
    f(loc_);
    f(log_scale_);
  }

 private:
  nn::Parameter<T> loc_;
  nn::Parameter<T> log_scale_;
};

// Hyper-analysis and hyper-synthesis networks predicting the conditional
// Gaussian of each main latent element from the hyper-latent.
//
//   encode: conv3x3/1 (N) -> LReLU -> conv5x5/2 (N) -> LReLU -> conv5x5/2 (N)
//   decode: deconv5x5/2 (N) -> LReLU -> deconv5x5/2 (N) -> LReLU
//           -> deconv3x3/1 (2M), split into (mu, softplus(.) + 1e-6)
template <typename T>
class HyperPrior {
 public:
  HyperPrior() = default;
  explicit HyperPrior(const ModelConfig& cfg);

  void Init(nn::Rng& rng);

  // z: [B,h,w,M] -> [B,ceil(h/4),ceil(w/4),N].
  nn::Var<T> Encode(nn::Tape<T>& tape, nn::Var<T> z);

  // h: [B,hh,hw,N] -> mu, sigma of shape [B,latent_h,latent_w,M].
  GaussianParams<T> Decode(nn::Tape<T>& tape, nn::Var<T> h, int latent_h,
                           int latent_w);

  FactorizedPrior<T>& prior() { return prior_; }

  template <typename F>
  void Visit(F&& f) {
    for (auto& l : enc_) l.Visit(f);
    for (auto& l : dec_) l.Visit(f);
    prior_.Visit(f);
  }

 private:
  int m_ = 0;
  std::array<nn::Conv2dLayer<T>, 3> enc_;
  std::array<nn::Deconv2dLayer<T>, 3> dec_;
  FactorizedPrior<T> prior_;
};

}  // namespace ecat::entropy

#endif  // ECAT_ENTROPY_HYPERPRIOR_HPP_
