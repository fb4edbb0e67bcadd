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

#ifndef ECAT_TRAIN_OPTIMIZER_HPP_
#define ECAT_TRAIN_OPTIMIZER_HPP_

#include <cstdint>
#include <vector>

#include "ecat/nn/tape.hpp"

namespace ecat::train {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Decoupled (AdamW) decay applied to tensors of rank >= 2; 0 gives Adam.
  double weight_decay = 0.0;
};

// Adam / AdamW with bias correction. State is aligned with the parameter
// list passed at construction; non-trainable parameters are skipped.
class Adam {
 public:
  Adam(std::vector<nn::Parameter<float>*> params, AdamOptions opts);

  // Applies one update with learning rate `lr` using Parameter::grad.
  void Step(double lr);

  std::int64_t steps() const { return t_; }

 private:
  std::vector<nn::Parameter<float>*> params_;
  AdamOptions opts_;
  std::vector<std::vector<float>> m_;
  std::vector<std::vector<float>> v_;
  std::int64_t t_ = 0;
};

// Linear warmup from 0 to `base` over `warmup` steps, then cosine decay to 0
// at `total`.
class CosineSchedule {
 public:
  CosineSchedule(double base, std::int64_t warmup, std::int64_t total);

  double operator()(std::int64_t step) const;

 private:
  double base_;
  std::int64_t warmup_;
  std::int64_t total_;
};

}  // namespace ecat::train

#endif  // ECAT_TRAIN_OPTIMIZER_HPP_
