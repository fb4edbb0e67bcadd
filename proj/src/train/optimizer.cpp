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

#include "ecat/train/optimizer.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ecat::train {

Adam::Adam(std::vector<nn::Parameter<float>*> params, AdamOptions opts)
    : params_(std::move(params)), opts_(opts) {
  m_.resize(params_.size());
  v_.resize(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    m_[i].assign(params_[i]->value.size(), 0.0f);
    v_[i].assign(params_[i]->value.size(), 0.0f);
  }
}

void Adam::Step(double lr) {
  ++t_;
  const double b1 = opts_.beta1, b2 = opts_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    nn::Parameter<float>& p = *params_[i];
    if (!p.trainable) continue;
    if (p.grad.size() != p.value.size()) {
      throw std::logic_error("gradient of " + p.name + " has wrong size");
    }
    const double decay =
        p.value.rank() >= 2 ? lr * opts_.weight_decay : 0.0;
    float* w = p.value.data();
    const float* g = p.grad.data();
    float* m = m_[i].data();
    float* v = v_[i].data();
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double gk = g[k];
      const double mk = b1 * m[k] + (1.0 - b1) * gk;
      const double vk = b2 * v[k] + (1.0 - b2) * gk * gk;
      m[k] = static_cast<float>(mk);
      v[k] = static_cast<float>(vk);
      double wk = w[k];
      wk -= decay * wk;
      wk -= lr * (mk / c1) / (std::sqrt(vk / c2) + opts_.eps);
      w[k] = static_cast<float>(wk);
    }
  }
}

CosineSchedule::CosineSchedule(double base, std::int64_t warmup,
                               std::int64_t total)
    : base_(base), warmup_(warmup), total_(total) {
  if (warmup < 0 || total <= 0 || warmup >= total) {
    throw std::invalid_argument("schedule needs 0 <= warmup < total");
  }
}

double CosineSchedule::operator()(std::int64_t step) const {
  if (step < warmup_) {
    return base_ * static_cast<double>(step) / static_cast<double>(warmup_);
  }
  if (step >= total_) return 0.0;
  const double progress = static_cast<double>(step - warmup_) /
                          static_cast<double>(total_ - warmup_);
  return 0.5 * base_ * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace ecat::train
