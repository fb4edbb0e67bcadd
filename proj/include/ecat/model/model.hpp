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

#ifndef ECAT_MODEL_MODEL_HPP_
#define ECAT_MODEL_MODEL_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ecat/entropy/hyperprior.hpp"
#include "ecat/model/config.hpp"
#include "ecat/model/encoder.hpp"
#include "ecat/model/reconstructor.hpp"
#include "ecat/model/transformer_head.hpp"

namespace ecat {

enum class Stage { kPretrain, kFull };

template <typename T>
struct ForwardOutputs {
  nn::Var<T> z;         // [B,h,w,M] continuous latent
  nn::Var<T> z_tilde;   // latent consumed by the decoder
  nn::Var<T> logits;    // [B,K]
  nn::Var<T> recon;     // [B,H,W,3] in [0,1] pixel units (unclamped)
  std::optional<nn::Var<T>> rate_bits;  // total bits over the batch
};

// The full codec: analysis transform, hyper-prior, transformer classifier
// and reconstructor, plus fixed per-channel input statistics.
template <typename T>
class Model {
 public:
  explicit Model(const ModelConfig& cfg);

  // Deterministic initialization from one seed.
  void Init(std::uint64_t seed);

  // Channel statistics of [0,1] training pixels.
  void SetNormalization(std::span<const double> mean,
                        std::span<const double> stddev);
  std::vector<T> mean() const;
  std::vector<T> stddev() const;

  const ModelConfig& config() const { return cfg_; }
  AnalysisTransform<T>& encoder() { return encoder_; }
  entropy::HyperPrior<T>& hyper() { return hyper_; }
  TransformerHead<T>& head() { return head_; }
  Reconstructor<T>& reconstructor() { return recon_; }

  // Fixed parameter order; defines checkpoint layout.
  template <typename F>
  void Visit(F&& f) {
    f(mean_);
    f(std_);
    encoder_.Visit(f);
    hyper_.Visit(f);
    head_.Visit(f);
    recon_.Visit(f);
  }

  std::vector<nn::Parameter<T>*> Parameters();
  void ZeroGrad();

  template <typename U>
  Model<U> Cast() {
    Model<U> out(cfg_);
    auto src = Parameters();
    auto dst = out.Parameters();
    for (std::size_t i = 0; i < src.size(); ++i) {
      dst[i]->value = src[i]->value.template Cast<U>();
    }
    return out;
  }

  // x01: [B,H,W,3] pixels in [0,1].
  nn::Tensor<T> Normalize(const nn::Tensor<T>& x01) const;
  // Normalized image -> [0,1] units.
  nn::Var<T> Denormalize(nn::Var<T> xn) const;

  // Training-time forward. kPretrain feeds z straight to the decoder;
  // kFull adds uniform noise to z and h (drawn from `noise`) and prices
  // both under the entropy models.
  ForwardOutputs<T> Forward(nn::Tape<T>& tape, const nn::Tensor<T>& x01,
                            Stage stage, nn::Rng* noise,
                            const FeatureMask& mask = FeatureMask::All());

  // Decoder side from a (quantized) latent: logits and [0,1] image.
  struct Decoded {
    nn::Var<T> logits;
    nn::Var<T> recon;
  };
  Decoded Decode(nn::Tape<T>& tape, nn::Var<T> z_hat,
                 const FeatureMask& mask = FeatureMask::All());

 private:
  ModelConfig cfg_;
  nn::Parameter<T> mean_;
  nn::Parameter<T> std_;
  AnalysisTransform<T> encoder_;
  entropy::HyperPrior<T> hyper_;
  TransformerHead<T> head_;
  Reconstructor<T> recon_;
};

}  // namespace ecat

#endif  // ECAT_MODEL_MODEL_HPP_
