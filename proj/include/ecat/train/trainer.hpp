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

#ifndef ECAT_TRAIN_TRAINER_HPP_
#define ECAT_TRAIN_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ecat/eval/dataset.hpp"
#include "ecat/model/model.hpp"
#include "ecat/train/loss.hpp"

namespace ecat::train {

struct TrainConfig {
  int epochs = 30;
  int batch_size = 32;
  double lr = 1e-3;
  double warmup_epochs = 1.0;
  double weight_decay = 0.05;  // AdamW in stage 1 only
  double alpha = 1.0;
  double beta = 0.001;
  std::uint64_t seed = 0;
  bool augment = true;
  int crop_pad = 4;
  bool shuffle = true;
  // Global gradient-norm clip; 0 disables.
  double clip_norm = 1.0;

  static TrainConfig Stage1Defaults();
  static TrainConfig Stage2Defaults();

  // Known keys: epochs, batch_size, lr, warmup_epochs, weight_decay, alpha,
  // beta, seed, augment, crop_pad, clip_norm. Unknown keys are ignored.
  void Apply(const std::map<std::string, std::string>& kv);
  void Validate() const;
};

struct EpochLog {
  int epoch = 0;
  double loss = 0, ce = 0, mse = 0, rate = 0, lr = 0;
};

struct TrainResult {
  std::vector<EpochLog> epochs;
  std::vector<double> step_losses;
};

using ProgressFn = std::function<void(const EpochLog&)>;

// Random horizontal flip and translation by up to `pad` pixels with edge
// replication, independently per image of a [B,H,W,3] batch.
void Augment(nn::Tensor<float>& batch, int pad, nn::Rng& rng);

// Stage 1: no quantization and no rate term; AdamW. Sets the model's input
// normalization from the dataset first.
TrainResult TrainStage1(Model<float>& model, const eval::Dataset& data,
                        const TrainConfig& cfg, const ProgressFn& progress = {});

// Stage 2: noisy quantization, hyper-prior and rate term; Adam over all
// parameters.
TrainResult TrainStage2(Model<float>& model, const eval::Dataset& data,
                        const TrainConfig& cfg, const ProgressFn& progress = {});

}  // namespace ecat::train

#endif  // ECAT_TRAIN_TRAINER_HPP_
