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

#include "ecat/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ecat/train/optimizer.hpp"

namespace ecat::train {

namespace {

// Seed stream tags.
constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kAugmentStream = 2;
constexpr std::uint64_t kNoiseStream = 3;

double ParseDouble(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("bad value for " + key + ": '" + v + "'");
  }
}

void ClipGradNorm(Model<float>& model, double max_norm) {
  double sq = 0.0;
  model.Visit([&](nn::Parameter<float>& p) {
    if (!p.trainable) return;
    for (float g : p.grad.values()) sq += static_cast<double>(g) * g;
  });
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return;
  const auto scale = static_cast<float>(max_norm / norm);
  model.Visit([&](nn::Parameter<float>& p) {
    if (!p.trainable) return;
    for (float& g : p.grad.values()) g *= scale;
  });
}

TrainResult Run(Model<float>& model, const eval::Dataset& data,
                const TrainConfig& cfg, Stage stage, const AdamOptions& opts,
                const ProgressFn& progress) {
  cfg.Validate();
  if (data.size() == 0) throw std::invalid_argument("empty training set");
  const std::size_t n = data.size();
  const std::size_t bs = std::min<std::size_t>(cfg.batch_size, n);
  const std::size_t steps_per_epoch = (n + bs - 1) / bs;
  const auto total = static_cast<std::int64_t>(steps_per_epoch * cfg.epochs);
  const auto warmup = std::min<std::int64_t>(
      static_cast<std::int64_t>(std::llround(cfg.warmup_epochs * steps_per_epoch)),
      total - 1);
  const CosineSchedule schedule(cfg.lr, warmup, total);
  Adam adam(model.Parameters(), opts);
  const LossWeights weights{cfg.alpha, cfg.beta, stage};

  TrainResult result;
  std::vector<std::size_t> order(n);
  std::int64_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (cfg.shuffle) {
      nn::Rng shuffle(nn::DeriveSeed(cfg.seed, {kShuffleStream,
                                                static_cast<std::uint64_t>(epoch)}));
      for (std::size_t i = n; i > 1; --i) {
        std::swap(order[i - 1], order[shuffle.Below(i)]);
      }
    }
    EpochLog log;
    log.epoch = epoch;
    for (std::size_t s = 0; s < steps_per_epoch; ++s) {
      const std::size_t begin = s * bs;
      const std::span<const std::size_t> idx(
          order.data() + begin, std::min(bs, n - begin));
      nn::Tensor<float> x = data.Batch(idx);
      const std::vector<int> labels = data.BatchLabels(idx);
      const auto ustep = static_cast<std::uint64_t>(step);
      if (cfg.augment) {
        nn::Rng aug(nn::DeriveSeed(cfg.seed, {kAugmentStream, ustep}));
        Augment(x, cfg.crop_pad, aug);
      }
      nn::Rng noise(nn::DeriveSeed(cfg.seed, {kNoiseStream, ustep}));

      model.ZeroGrad();
      nn::Tape<float> tape;
      const LossTerms<float> terms =
          JointLoss(tape, model, x, labels, weights, &noise);
      tape.Backward(terms.total);
      if (cfg.clip_norm > 0.0) ClipGradNorm(model, cfg.clip_norm);
      const double lr = schedule(step);
      adam.Step(lr);

      const double w = static_cast<double>(idx.size()) / n;
      log.loss += w * terms.total_value();
      log.ce += w * terms.ce_value();
      log.mse += w * terms.mse_value();
      log.rate += w * terms.rate_value();
      log.lr = lr;
      result.step_losses.push_back(terms.total_value());
      ++step;
    }
    result.epochs.push_back(log);
    if (progress) progress(log);
  }
  return result;
}

}  // namespace

TrainConfig TrainConfig::Stage1Defaults() {
  TrainConfig c;
  c.lr = 2e-3;
  return c;
}

TrainConfig TrainConfig::Stage2Defaults() {
  TrainConfig c;
  c.epochs = 10;
  c.lr = 3e-4;
  c.warmup_epochs = 0.5;
  c.weight_decay = 0.0;
  c.alpha = 0.3;
  c.beta = 0.003;
  return c;
}

void TrainConfig::Apply(const std::map<std::string, std::string>& kv) {
  for (const auto& [k, v] : kv) {
    if (k == "epochs") epochs = static_cast<int>(ParseDouble(k, v));
    else if (k == "batch_size") batch_size = static_cast<int>(ParseDouble(k, v));
    else if (k == "lr") lr = ParseDouble(k, v);
    else if (k == "warmup_epochs") warmup_epochs = ParseDouble(k, v);
    else if (k == "weight_decay") weight_decay = ParseDouble(k, v);
    else if (k == "alpha") alpha = ParseDouble(k, v);
    else if (k == "beta") beta = ParseDouble(k, v);
    else if (k == "seed") seed = std::stoull(v);
    else if (k == "augment") augment = v == "1" || v == "true";
    else if (k == "crop_pad") crop_pad = static_cast<int>(ParseDouble(k, v));
    else if (k == "clip_norm") clip_norm = ParseDouble(k, v);
  }
}

void TrainConfig::Validate() const {
  if (epochs <= 0) throw ConfigError("epochs must be positive");
  if (batch_size <= 0) throw ConfigError("batch_size must be positive");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (warmup_epochs < 0.0 || warmup_epochs >= epochs) {
    throw ConfigError("warmup must be shorter than training");
  }
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  if (alpha < 0.0 || beta < 0.0) throw ConfigError("alpha, beta must be >= 0");
  if (crop_pad < 0) throw ConfigError("crop_pad must be >= 0");
  if (clip_norm < 0.0) throw ConfigError("clip_norm must be >= 0");
}

void Augment(nn::Tensor<float>& batch, int pad, nn::Rng& rng) {
  const std::int64_t b = batch.dim(0), h = batch.dim(1), w = batch.dim(2);
  const std::int64_t c = batch.dim(3);
  std::vector<float> src(static_cast<std::size_t>(h * w * c));
  for (std::int64_t i = 0; i < b; ++i) {
    const bool flip = rng.Uniform() < 0.5;
    const auto span = static_cast<std::uint64_t>(2 * pad + 1);
    const std::int64_t oy = static_cast<std::int64_t>(rng.Below(span)) - pad;
    const std::int64_t ox = static_cast<std::int64_t>(rng.Below(span)) - pad;
    float* img = batch.data() + i * h * w * c;
    std::copy(img, img + h * w * c, src.begin());
    for (std::int64_t y = 0; y < h; ++y) {
      const std::int64_t sy = std::clamp<std::int64_t>(y + oy, 0, h - 1);
      for (std::int64_t x = 0; x < w; ++x) {
        std::int64_t sx = std::clamp<std::int64_t>(x + ox, 0, w - 1);
        if (flip) sx = w - 1 - sx;
        for (std::int64_t k = 0; k < c; ++k) {
          img[(y * w + x) * c + k] = src[static_cast<std::size_t>((sy * w + sx) * c + k)];
        }
      }
    }
  }
}

TrainResult TrainStage1(Model<float>& model, const eval::Dataset& data,
                        const TrainConfig& cfg, const ProgressFn& progress) {
  const eval::ChannelStats stats = eval::ComputeChannelStats(data);
  model.SetNormalization(stats.mean, stats.stddev);
  AdamOptions opts;
  opts.weight_decay = cfg.weight_decay;
  return Run(model, data, cfg, Stage::kPretrain, opts, progress);
}

TrainResult TrainStage2(Model<float>& model, const eval::Dataset& data,
                        const TrainConfig& cfg, const ProgressFn& progress) {
  return Run(model, data, cfg, Stage::kFull, AdamOptions{}, progress);
}

}  // namespace ecat::train
