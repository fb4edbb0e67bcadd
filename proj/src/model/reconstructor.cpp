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

#include "ecat/model/reconstructor.hpp"

#include "ecat/model/encoder.hpp"

namespace ecat {

namespace {

// Output layer starts near the mean image.
constexpr double kOutputInitGain = 0.3;

}  // namespace

template <typename T>
Reconstructor<T>::Reconstructor(const ModelConfig& cfg) {
  const int c = cfg.embed_c, n = cfg.channels_n;
  for (std::size_t i = 0; i < branch_.size(); ++i) {
    branch_[i] = nn::LinearLayer<T>("recon.branch" + std::to_string(i), c, c / 4);
  }
  fuse_ = nn::LinearLayer<T>("recon.fuse", c, c);
  const nn::ConvGeometry up{5, 2, 2, 1};
  const std::array<int, 5> widths = {c, n, n, n, 3};
  for (std::size_t i = 0; i < synth_.size(); ++i) {
    synth_[i] = nn::Deconv2dLayer<T>("recon.synth" + std::to_string(i),
                                     widths[i], widths[i + 1], up);
  }
}

template <typename T>
void Reconstructor<T>::Init(nn::Rng& rng) {
  for (auto& l : branch_) l.InitFanIn(rng);
  fuse_.InitFanIn(rng);
  for (std::size_t i = 0; i < synth_.size(); ++i) {
    synth_[i].Init(rng, i + 1 < synth_.size());
  }
  for (auto& v : synth_.back().weight().value.values()) {
    v = static_cast<T>(v * kOutputInitGain);
  }
}

template <typename T>
nn::Var<T> Reconstructor<T>::Aggregate(
    nn::Tape<T>& tape, nn::Var<T> z0,
    const std::array<nn::Var<T>, 3>& intermediates, const FeatureMask& mask) {
  std::array<nn::Var<T>, 4> parts;
  parts[0] = branch_[0](tape, z0);
  for (std::size_t i = 0; i < 3; ++i) {
    const nn::Var<T>& f = intermediates[i];
    if (f.shape() != z0.shape()) {
      throw nn::ShapeError("aggregation input " + nn::ShapeToString(f.shape()) +
                           " differs from " + nn::ShapeToString(z0.shape()));
    }
    nn::Var<T> in = mask.keep[i] ? f : tape.Constant(nn::Tensor<T>(f.shape()));
    parts[i + 1] = branch_[i + 1](tape, in);
  }
  return fuse_(tape, nn::ConcatLast<T>(parts));
}

template <typename T>
nn::Var<T> Reconstructor<T>::Synthesize(nn::Tape<T>& tape, nn::Var<T> zf) {
  const T slope = static_cast<T>(kLeakySlope);
  nn::Var<T> x = zf;
  for (std::size_t i = 0; i < synth_.size(); ++i) {
    x = synth_[i](tape, x);
    if (i + 1 < synth_.size()) x = nn::LeakyRelu(x, slope);
  }
  return x;
}

template class Reconstructor<float>;
template class Reconstructor<double>;

}  // namespace ecat
