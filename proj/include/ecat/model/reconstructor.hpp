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

#ifndef ECAT_MODEL_RECONSTRUCTOR_HPP_
#define ECAT_MODEL_RECONSTRUCTOR_HPP_

#include <array>

#include "ecat/model/config.hpp"
#include "ecat/nn/layers.hpp"

namespace ecat {

// Which transformer intermediates feed the aggregation; dropped ones are
// replaced by zeros.
struct FeatureMask {
  std::array<bool, 3> keep = {true, true, true};

  static FeatureMask All() { return {}; }
  // Keeps the first `n` intermediates (0..3).
  static FeatureMask FirstN(int n) {
    FeatureMask m;
    for (int i = 0; i < 3; ++i) m.keep[static_cast<std::size_t>(i)] = i < n;
    return m;
  }
};

// Feature aggregation followed by the synthesis transform.
//
//   z_f = Fuse(concat(B0 z0, B1 z1, B2 z2, B3 z3))   (all 1x1, no activation)
//   x   = deconv5x5/2 x4, widths [N, N, N, 3], LeakyReLU between
template <typename T>
class Reconstructor {
 public:
  Reconstructor() = default;
  explicit Reconstructor(const ModelConfig& cfg);

  void Init(nn::Rng& rng);

  // All inputs [B, h, w, C].
  nn::Var<T> Aggregate(nn::Tape<T>& tape, nn::Var<T> z0,
                       const std::array<nn::Var<T>, 3>& intermediates,
                       const FeatureMask& mask = FeatureMask::All());

  // [B, h, w, C] -> [B, 16h, 16w, 3] in the normalized image domain.
  nn::Var<T> Synthesize(nn::Tape<T>& tape, nn::Var<T> zf);

  std::array<nn::LinearLayer<T>, 4>& branches() { return branch_; }
  nn::LinearLayer<T>& fuse() { return fuse_; }

  template <typename F>
  void Visit(F&& f) {
    for (auto& l : branch_) l.Visit(f);
    fuse_.Visit(f);
    for (auto& l : synth_) l.Visit(f);
  }

 private:
  std::array<nn::LinearLayer<T>, 4> branch_;
  nn::LinearLayer<T> fuse_;
  std::array<nn::Deconv2dLayer<T>, 4> synth_;
};

}  // namespace ecat

#endif  // ECAT_MODEL_RECONSTRUCTOR_HPP_
