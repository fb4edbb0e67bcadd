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

#include "ecat/model/model.hpp"

#include "ecat/entropy/likelihood.hpp"

namespace ecat {

template <typename T>
Model<T>::Model(const ModelConfig& cfg)
    : cfg_(cfg),
      mean_("data.mean", nn::Tensor<T>(nn::Shape{3}, T{0}), false),
      std_("data.std", nn::Tensor<T>(nn::Shape{3}, T{1}), false),
      encoder_(cfg),
      hyper_(cfg),
      head_(cfg),
      recon_(cfg) {
  cfg.Validate();
}

template <typename T>
void Model<T>::Init(std::uint64_t seed) {
  nn::Rng enc(nn::DeriveSeed(seed, {1}));
  nn::Rng hyp(nn::DeriveSeed(seed, {2}));
  nn::Rng head(nn::DeriveSeed(seed, {3}));
  nn::Rng rec(nn::DeriveSeed(seed, {4}));
  encoder_.Init(enc);
  hyper_.Init(hyp);
  head_.Init(head);
  recon_.Init(rec);
}

template <typename T>
void Model<T>::SetNormalization(std::span<const double> mean,
                                std::span<const double> stddev) {
  if (mean.size() != 3 || stddev.size() != 3) {
    throw std::invalid_argument("normalization needs 3 channels");
  }
  for (std::size_t c = 0; c < 3; ++c) {
    if (!(stddev[c] > 0.0)) {
      throw std::invalid_argument("channel stddev must be positive");
    }
    mean_.value[c] = static_cast<T>(mean[c]);
    std_.value[c] = static_cast<T>(stddev[c]);
  }
}

template <typename T>
std::vector<T> Model<T>::mean() const {
  return mean_.value.storage();
}

template <typename T>
std::vector<T> Model<T>::stddev() const {
  return std_.value.storage();
}

template <typename T>
std::vector<nn::Parameter<T>*> Model<T>::Parameters() {
  std::vector<nn::Parameter<T>*> out;
  Visit([&](nn::Parameter<T>& p) { out.push_back(&p); });
  return out;
}

template <typename T>
void Model<T>::ZeroGrad() {
  Visit([](nn::Parameter<T>& p) { p.ZeroGrad(); });
}

template <typename T>
nn::Tensor<T> Model<T>::Normalize(const nn::Tensor<T>& x01) const {
  if (x01.rank() != 4 || x01.dim(3) != 3) {
    throw nn::ShapeError("image batch must be [B,H,W,3], got " +
                         nn::ShapeToString(x01.shape()));
  }
  nn::Tensor<T> out(x01.shape());
  for (std::size_t i = 0; i < x01.size(); ++i) {
    const std::size_t c = i % 3;
    out[i] = (x01[i] - mean_.value[c]) / std_.value[c];
  }
  return out;
}

template <typename T>
nn::Var<T> Model<T>::Denormalize(nn::Var<T> xn) const {
  return nn::AffineChannels(xn, std_.value.values(), mean_.value.values());
}

template <typename T>
typename Model<T>::Decoded Model<T>::Decode(nn::Tape<T>& tape,
                                            nn::Var<T> z_hat,
                                            const FeatureMask& mask) {
  const EmbeddedTokens<T> emb = head_.Embed(tape, z_hat);
  const TransformerOutputs<T> tr = head_.Forward(tape, emb.seq);
  Decoded d;
  d.logits = head_.Logits(tape, tr.cls);
  const nn::Var<T> zf = recon_.Aggregate(tape, emb.z0, tr.intermediates, mask);
  d.recon = Denormalize(recon_.Synthesize(tape, zf));
  return d;
}

template <typename T>
ForwardOutputs<T> Model<T>::Forward(nn::Tape<T>& tape,
                                    const nn::Tensor<T>& x01, Stage stage,
                                    nn::Rng* noise, const FeatureMask& mask) {
  if (x01.rank() != 4 || x01.dim(1) != cfg_.input_h ||
      x01.dim(2) != cfg_.input_w) {
    throw nn::ShapeError("input " + nn::ShapeToString(x01.shape()) +
                         " does not match configured size " +
                         std::to_string(cfg_.input_h) + "x" +
                         std::to_string(cfg_.input_w));
  }
  ForwardOutputs<T> out;
  out.z = encoder_(tape, tape.Constant(Normalize(x01)));
  if (stage == Stage::kPretrain) {
    out.z_tilde = out.z;
  } else {
    if (noise == nullptr) {
      throw std::invalid_argument("full-stage forward needs a noise source");
    }
    out.z_tilde = QuantizeTrain(out.z, *noise);
    const nn::Var<T> h = hyper_.Encode(tape, out.z);
    const nn::Var<T> h_tilde = QuantizeTrain(h, *noise);
    const entropy::GaussianParams<T> g =
        hyper_.Decode(tape, h_tilde, cfg_.latent_h(), cfg_.latent_w());
    out.rate_bits = nn::Add(
        entropy::GaussianRateBits(out.z_tilde, g.mu, g.sigma),
        hyper_.prior().RateBits(tape, h_tilde));
  }
  const Decoded d = Decode(tape, out.z_tilde, mask);
  out.logits = d.logits;
  out.recon = d.recon;
  return out;
}

template class Model<float>;
template class Model<double>;

}  // namespace ecat
