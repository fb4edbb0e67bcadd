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

#include "ecat/entropy/hyperprior.hpp"

#include "ecat/entropy/likelihood.hpp"
#include "ecat/model/encoder.hpp"

namespace ecat::entropy {

using nn::ConvGeometry;

HyperPadding HyperPadding::For(int latent_h, int latent_w) {
  HyperPadding p;
  const int ph = (4 - latent_h % 4) % 4;
  const int pw = (4 - latent_w % 4) % 4;
  p.top = ph / 2;
  p.bottom = ph - p.top;
  p.left = pw / 2;
  p.right = pw - p.left;
  return p;
}

template <typename T>
FactorizedPrior<T>::FactorizedPrior(int channels)
    : loc_("hyper.prior.loc", nn::Tensor<T>(nn::Shape{channels})),
      log_scale_("hyper.prior.log_scale", nn::Tensor<T>(nn::Shape{channels})) {}

template <typename T>
nn::Var<T> FactorizedPrior<T>::RateBits(nn::Tape<T>& tape, nn::Var<T> h) {
  return LogisticRateBits(h, tape.Param(loc_), tape.Param(log_scale_));
}

template <typename T>
HyperPrior<T>::HyperPrior(const ModelConfig& cfg) : m_(cfg.channels_m) {
  const int n = cfg.channels_n, m = cfg.channels_m;
  const ConvGeometry s1{3, 1, 1, 0};
  const ConvGeometry s2{5, 2, 2, 0};
  const ConvGeometry up2{5, 2, 2, 1};
  enc_[0] = nn::Conv2dLayer<T>("hyper.enc0", m, n, s1);
  enc_[1] = nn::Conv2dLayer<T>("hyper.enc1", n, n, s2);
  enc_[2] = nn::Conv2dLayer<T>("hyper.enc2", n, n, s2);
  dec_[0] = nn::Deconv2dLayer<T>("hyper.dec0", n, n, up2);
  dec_[1] = nn::Deconv2dLayer<T>("hyper.dec1", n, n, up2);
  dec_[2] = nn::Deconv2dLayer<T>("hyper.dec2", n, 2 * m, s1);
  prior_ = FactorizedPrior<T>(n);
}

template <typename T>
void HyperPrior<T>::Init(nn::Rng& rng) {
  for (std::size_t i = 0; i < enc_.size(); ++i) enc_[i].Init(rng, i + 1 < enc_.size());
  for (std::size_t i = 0; i < dec_.size(); ++i) dec_[i].Init(rng, i + 1 < dec_.size());
  prior_.loc().value.Fill(T{0});
  prior_.log_scale().value.Fill(T{0});
}

template <typename T>
nn::Var<T> HyperPrior<T>::Encode(nn::Tape<T>& tape, nn::Var<T> z) {
  const nn::Shape& s = z.shape();
  if (s.size() != 4 || s[3] != m_) {
    throw nn::ShapeError("hyper encode expects [B,h,w," + std::to_string(m_) +
                         "], got " + nn::ShapeToString(s));
  }
  const HyperPadding pad =
      HyperPadding::For(static_cast<int>(s[1]), static_cast<int>(s[2]));
  nn::Var<T> h = z;
  if (pad.top || pad.bottom || pad.left || pad.right) {
    h = nn::PadSpatial(h, pad.top, pad.bottom, pad.left, pad.right);
  }
  const T slope = static_cast<T>(kLeakySlope);
  h = nn::LeakyRelu(enc_[0](tape, h), slope);
  h = nn::LeakyRelu(enc_[1](tape, h), slope);
  return enc_[2](tape, h);
}

template <typename T>
GaussianParams<T> HyperPrior<T>::Decode(nn::Tape<T>& tape, nn::Var<T> h,
                                        int latent_h, int latent_w) {
  const HyperPadding pad = HyperPadding::For(latent_h, latent_w);
  const nn::Shape& s = h.shape();
  if (s.size() != 4 || s[1] * 4 != latent_h + pad.top + pad.bottom ||
      s[2] * 4 != latent_w + pad.left + pad.right) {
    throw nn::ShapeError("hyper decode input " + nn::ShapeToString(s) +
                         " does not match latent " + std::to_string(latent_h) +
                         "x" + std::to_string(latent_w));
  }
  const T slope = static_cast<T>(kLeakySlope);
  nn::Var<T> x = nn::LeakyRelu(dec_[0](tape, h), slope);
  x = nn::LeakyRelu(dec_[1](tape, x), slope);
  x = dec_[2](tape, x);
  if (pad.top || pad.bottom || pad.left || pad.right) {
    x = nn::CropSpatial(x, pad.top, pad.bottom, pad.left, pad.right);
  }
  GaussianParams<T> out;
  out.mu = nn::SliceLast(x, 0, m_);
  out.sigma = nn::Softplus(nn::SliceLast(x, m_, m_), static_cast<T>(kSigmaFloor));
  return out;
}

template class FactorizedPrior<float>;
template class FactorizedPrior<double>;
template class HyperPrior<float>;
template class HyperPrior<double>;

}  // namespace ecat::entropy
