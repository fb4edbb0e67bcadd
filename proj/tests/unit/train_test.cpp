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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "ecat/eval/dataset.hpp"
#include "ecat/model/model.hpp"
#include "ecat/nn/gradcheck.hpp"
#include "ecat/train/checkpoint.hpp"
#include "ecat/train/loss.hpp"
#include "ecat/train/optimizer.hpp"
#include "ecat/train/trainer.hpp"

namespace ecat::train {
namespace {

using nn::Shape;
using nn::Tensor;

ModelConfig Tiny() {
  ModelConfig c;
  c.input_h = 16;
  c.input_w = 32;
  c.channels_n = 4;
  c.channels_m = 3;
  c.embed_c = 8;
  c.depth_l = 3;
  c.heads = 2;
  c.num_classes = 5;
  c.ffn_ratio = 2.0;
  return c;
}

Tensor<double> RandomImages(std::int64_t b, const ModelConfig& cfg, std::uint64_t seed) {
  nn::Rng rng(seed);
  return rng.UniformTensor<double>(Shape{b, cfg.input_h, cfg.input_w, 3}, 0.0, 1.0);
}

// --- loss ------------------------------------------------------------------

TEST(JointLoss, PerfectPredictionIsZero) {
  const ModelConfig cfg = Tiny();
  Model<double> model(cfg);
  model.Init(1);
  const std::vector<double> mean = {0.25, 0.5, 0.75}, sd = {0.2, 0.2, 0.2};
  model.SetNormalization(mean, sd);
  auto& last = model.reconstructor();
  last.Visit([](nn::Parameter<double>& p) {
    if (p.name.rfind("recon.synth3", 0) == 0) p.value.Fill(0.0);
  });
  auto& cls = model.head().classifier();
  cls.weight().value.Fill(0.0);
  cls.bias().value.Fill(0.0);
  cls.bias().value[2] = 1000.0;
  Tensor<double> x(Shape{2, cfg.input_h, cfg.input_w, 3});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = mean[i % 3];
  const std::vector<int> y = {2, 2};
  nn::Tape<double> tape(false);
  auto t = JointLoss(tape, model, x, y, LossWeights{}, nullptr);
  EXPECT_EQ(t.ce_value(), 0.0);
  EXPECT_EQ(t.mse_value(), 0.0);
  EXPECT_EQ(t.rate_value(), 0.0);
  EXPECT_EQ(t.total_value(), 0.0);
}

TEST(JointLoss, UniformClassifierGivesLogK) {
  const ModelConfig cfg = Tiny();
  Model<double> model(cfg);
  model.Init(2);
  model.head().classifier().weight().value.Fill(0.0);
  model.head().classifier().bias().value.Fill(0.0);
  const std::vector<int> y = {0, 3, 4};
  nn::Tape<double> tape(false);
  auto t = JointLoss(tape, model, RandomImages(3, cfg, 3), y, LossWeights{}, nullptr);
  EXPECT_NEAR(t.ce_value(), std::log(5.0), 1e-12);
}

TEST(JointLoss, DecompositionMatchesRecomputation) {
  const ModelConfig cfg = Tiny();
  Model<double> model(cfg);
  model.Init(4);
  const auto x = RandomImages(3, cfg, 5);
  const std::vector<int> y = {1, 0, 4};
  const LossWeights w{0.3, 0.003, Stage::kFull};
  nn::Rng noise(6);
  nn::Tape<double> tape(false);
  auto t = JointLoss(tape, model, x, y, w, &noise);
  EXPECT_NEAR(t.total_value(), w.alpha * t.ce_value() + w.beta * t.mse_value() + t.rate_value(),
              1e-6);
  EXPECT_GT(t.rate_value(), 0.0);

  // Independent recomputation of each term from the same forward pass.
  nn::Rng noise2(6);
  nn::Tape<double> tape2(false);
  auto out = model.Forward(tape2, x, Stage::kFull, &noise2);
  const auto& logits = out.logits.value();
  double ce = 0.0;
  for (std::size_t b = 0; b < 3; ++b) {
    double mx = -1e300, s = 0.0;
    for (std::size_t k = 0; k < 5; ++k) mx = std::max(mx, logits[b * 5 + k]);
    for (std::size_t k = 0; k < 5; ++k) s += std::exp(logits[b * 5 + k] - mx);
    ce += mx + std::log(s) - logits[b * 5 + static_cast<std::size_t>(y[b])];
  }
  ce /= 3.0;
  double se = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = 255.0 * (out.recon.value()[i] - x[i]);
    se += d * d;
  }
  const double mse = se / static_cast<double>(x.size());
  const double rate = out.rate_bits->value().item() / (3.0 * 16 * 32);
  EXPECT_NEAR(t.ce_value(), ce, 1e-9);
  EXPECT_NEAR(t.mse_value(), mse, 1e-6 * mse);
  EXPECT_NEAR(t.rate_value(), rate, 1e-9 * rate);
  EXPECT_NEAR(t.total_value(), w.alpha * ce + w.beta * mse + rate, 1e-6);
}

TEST(JointLoss, PretrainIsDeterministic) {
  const ModelConfig cfg = Tiny();
  Model<float> model(cfg);
  model.Init(7);
  nn::Rng rng(8);
  const auto x = rng.UniformTensor<float>(Shape{2, 16, 32, 3}, 0, 1);
  const std::vector<int> y = {0, 1};
  nn::Tape<float> t1(false), t2(false);
  const double a = JointLoss(t1, model, x, y, LossWeights{}, nullptr).total_value();
  const double b = JointLoss(t2, model, x, y, LossWeights{}, nullptr).total_value();
  EXPECT_EQ(a, b);
}

TEST(JointLoss, RejectsNegativeWeights) {
  Model<float> model(Tiny());
  model.Init(9);
  nn::Tape<float> tape(false);
  const std::vector<int> y = {0};
  EXPECT_THROW(JointLoss(tape, model, Tensor<float>(Shape{1, 16, 32, 3}), y,
                         LossWeights{-1.0, 0.0, Stage::kPretrain}, nullptr),
               std::invalid_argument);
}

TEST(JointLoss, NonFiniteIsReported) {
  Model<float> model(Tiny());
  model.Init(10);
  model.head().classifier().bias().value[0] = std::numeric_limits<float>::infinity();
  nn::Tape<float> tape(false);
  const std::vector<int> y = {0};
  EXPECT_THROW(JointLoss(tape, model, Tensor<float>(Shape{1, 16, 32, 3}), y, LossWeights{},
                         nullptr),
               nn::NonFiniteError);
}

TEST(JointLoss, FullModelGradient) {
  const ModelConfig cfg = Tiny();
  Model<float> base(cfg);
  base.Init(11);
  Model<double> model = base.Cast<double>();
  const auto x = RandomImages(2, cfg, 12);
  const std::vector<int> y = {3, 1};
  const LossWeights w{0.3, 0.003, Stage::kFull};
  nn::ParamLossFn f = [&](nn::Tape<double>& tape) {
    nn::Rng noise(13);
    return JointLoss(tape, model, x, y, w, &noise).total;
  };
  // Zero-initialized biases put zero-padded positions exactly on the leaky
  // kink; jitter moves every parameter off it.
  nn::Rng jitter(14);
  std::vector<nn::Parameter<double>*> params;
  for (auto* p : model.Parameters()) {
    if (!p->trainable) continue;
    for (auto& v : p->value.values()) v += 0.01 * jitter.Normal();
    params.push_back(p);
  }
  nn::GradCheckOptions opts;
  opts.max_samples = 6;
  auto r = nn::ParameterGradientCheck(f, params, 1e-3, opts);
  EXPECT_TRUE(r.passed) << r.Summary();
}

// --- optimizer -------------------------------------------------------------

TEST(Adam, ConstantGradientTrajectory) {
  // m_t/(1-b1^t) = g and v_t/(1-b2^t) = g^2, so every step moves lr*g/(|g|+eps).
  nn::Parameter<float> w("w", Tensor<float>(Shape{1}, 1.0f));
  Adam opt({&w}, AdamOptions{});
  const double want[3] = {0.9000000002, 0.8000000004, 0.7000000006};
  for (int s = 0; s < 3; ++s) {
    w.grad = Tensor<float>(Shape{1}, 0.5f);
    opt.Step(0.1);
    EXPECT_NEAR(w.value[0], want[s], 1e-6);
  }
  EXPECT_EQ(opt.steps(), 3);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  nn::Parameter<float> w("w", Tensor<float>(Shape{2, 2}, 0.7f));
  nn::Parameter<float> b("b", Tensor<float>(Shape{2}, 0.3f));
  w.ZeroGrad();
  b.ZeroGrad();
  Adam adam({&w, &b}, AdamOptions{});
  adam.Step(0.01);
  for (float v : w.value.values()) EXPECT_EQ(v, 0.7f);
  AdamOptions decayed;
  decayed.weight_decay = 0.05;
  Adam adamw({&w, &b}, decayed);
  adamw.Step(0.01);
  for (float v : w.value.values()) EXPECT_FLOAT_EQ(v, 0.7f * (1.0f - 0.01f * 0.05f));
  for (float v : b.value.values()) EXPECT_EQ(v, 0.3f);
}

TEST(Adam, FrozenParameterUntouched) {
  nn::Parameter<float> w("w", Tensor<float>(Shape{3}, 1.0f), false);
  w.grad = Tensor<float>(Shape{3}, 1.0f);
  Adam opt({&w}, AdamOptions{});
  opt.Step(0.5);
  for (float v : w.value.values()) EXPECT_EQ(v, 1.0f);
}

TEST(CosineSchedule, Endpoints) {
  CosineSchedule s(1e-3, 10, 110);
  EXPECT_EQ(s(0), 0.0);
  EXPECT_DOUBLE_EQ(s(5), 5e-4);
  EXPECT_DOUBLE_EQ(s(10), 1e-3);
  EXPECT_NEAR(s(60), 5e-4, 1e-15);
  EXPECT_EQ(s(110), 0.0);
  for (int t = 10; t < 110; ++t) EXPECT_GE(s(t), s(t + 1));
  EXPECT_THROW(CosineSchedule(1e-3, 10, 10), std::invalid_argument);
}

// --- checkpoint ------------------------------------------------------------

TEST(Checkpoint, RoundTripIsBitIdentical) {
  const ModelConfig cfg = Tiny();
  Model<float> a(cfg), b(cfg);
  a.Init(14);
  b.Init(15);
  const std::vector<double> mean = {0.1, 0.2, 0.3}, sd = {0.5, 0.6, 0.7};
  a.SetNormalization(mean, sd);
  const auto bytes = EncodeCheckpoint(a, Stage::kFull, 7);
  const CheckpointInfo info = DecodeCheckpoint(bytes, b);
  EXPECT_EQ(info.epoch, 7u);
  EXPECT_EQ(info.stage, Stage::kFull);
  EXPECT_EQ(info.digest, cfg.Digest());
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "ECKP");
  nn::Rng rng(16);
  const auto x = rng.UniformTensor<float>(Shape{2, 16, 32, 3}, 0, 1);
  nn::Rng n1(17), n2(17);
  nn::Tape<float> t1(false), t2(false);
  auto oa = a.Forward(t1, x, Stage::kFull, &n1);
  auto ob = b.Forward(t2, x, Stage::kFull, &n2);
  EXPECT_TRUE(oa.recon.value() == ob.recon.value());
  EXPECT_TRUE(oa.logits.value() == ob.logits.value());
  EXPECT_TRUE(oa.rate_bits->value() == ob.rate_bits->value());
  EXPECT_EQ(EncodeCheckpoint(b, Stage::kFull, 7), bytes);
}

TEST(Checkpoint, FileRoundTrip) {
  const ModelConfig cfg = Tiny();
  Model<float> a(cfg), b(cfg);
  a.Init(18);
  const auto path = (std::filesystem::temp_directory_path() / "ecat_ckpt_test.ckpt").string();
  SaveCheckpoint(path, a, Stage::kPretrain, 3);
  LoadCheckpoint(path, b);
  EXPECT_EQ(EncodeCheckpoint(a, Stage::kPretrain, 3), EncodeCheckpoint(b, Stage::kPretrain, 3));
  std::filesystem::remove(path);
  EXPECT_THROW(LoadCheckpoint(path, b), std::ios_base::failure);
}

TEST(Checkpoint, RejectsMismatchAndCorruption) {
  const ModelConfig cfg = Tiny();
  Model<float> a(cfg);
  a.Init(19);
  const auto bytes = EncodeCheckpoint(a, Stage::kPretrain, 1);
  Model<float> other(ModelConfig::Desk());
  EXPECT_THROW(DecodeCheckpoint(bytes, other), CheckpointError);
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(DecodeCheckpoint(bad, a), CheckpointError);
  auto cut = bytes;
  cut.resize(cut.size() - 5);
  EXPECT_THROW(DecodeCheckpoint(cut, a), CheckpointError);
  // a failed load leaves the model untouched
  const auto before = EncodeCheckpoint(a, Stage::kPretrain, 1);
  EXPECT_EQ(before, bytes);
}

// --- training loop ---------------------------------------------------------

class TrainLoopTest : public ::testing::Test {
 protected:
  static TrainConfig Small() {
    TrainConfig c;
    c.epochs = 2;
    c.batch_size = 4;
    c.lr = 3e-3;
    c.warmup_epochs = 0.5;
    c.seed = 5;
    return c;
  }
  ModelConfig cfg_ = []() {
    ModelConfig c = Tiny();
    c.num_classes = 10;
    return c;
  }();
  eval::Dataset data_ = eval::SynthesizeDataset(12, 16, 32, 20);
};

TEST_F(TrainLoopTest, SameSeedSameCurves) {
  Model<float> a(cfg_), b(cfg_);
  a.Init(21);
  b.Init(21);
  const auto ra = TrainStage1(a, data_, Small());
  const auto rb = TrainStage1(b, data_, Small());
  EXPECT_EQ(ra.step_losses, rb.step_losses);
  EXPECT_EQ(EncodeCheckpoint(a, Stage::kPretrain, 2), EncodeCheckpoint(b, Stage::kPretrain, 2));
  TrainConfig s2 = TrainConfig::Stage2Defaults();
  s2.epochs = 1;
  s2.batch_size = 4;
  s2.seed = 6;
  const auto qa = TrainStage2(a, data_, s2);
  const auto qb = TrainStage2(b, data_, s2);
  EXPECT_EQ(qa.step_losses, qb.step_losses);
  for (const auto& e : qa.epochs) {
    EXPECT_TRUE(std::isfinite(e.rate));
    EXPECT_GT(e.rate, 0.0);
  }
}

TEST_F(TrainLoopTest, DifferentSeedDifferentCurves) {
  Model<float> a(cfg_), b(cfg_);
  a.Init(22);
  b.Init(22);
  TrainConfig c = Small();
  const auto ra = TrainStage1(a, data_, c);
  c.seed = 99;
  const auto rb = TrainStage1(b, data_, c);
  EXPECT_NE(ra.step_losses, rb.step_losses);
}

TEST_F(TrainLoopTest, LossDecreases) {
  Model<float> m(cfg_);
  m.Init(23);
  TrainConfig c = Small();
  c.epochs = 8;
  c.augment = false;
  std::vector<EpochLog> logs;
  TrainStage1(m, data_, c, [&](const EpochLog& l) { logs.push_back(l); });
  ASSERT_EQ(logs.size(), 8u);
  EXPECT_LT(logs.back().loss, logs.front().loss);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.warmup_epochs = c.epochs;
  EXPECT_THROW(c.Validate(), ConfigError);
  TrainConfig d = TrainConfig::Stage1Defaults();
  EXPECT_DOUBLE_EQ(d.alpha, 1.0);
  EXPECT_DOUBLE_EQ(d.beta, 0.001);
  TrainConfig e = TrainConfig::Stage2Defaults();
  EXPECT_DOUBLE_EQ(e.alpha / e.beta, 100.0);
}

TEST(Augment, PreservesShapeAndPixelSet) {
  nn::Rng rng(24);
  auto batch = rng.UniformTensor<float>(Shape{4, 16, 16, 3}, 0, 1);
  const auto orig = batch;
  nn::Rng a(25);
  Augment(batch, 0, a);  // no translation: flips only
  for (std::size_t b = 0; b < 4; ++b) {
    const std::size_t n = 16 * 16 * 3;
    std::vector<float> x(orig.data() + b * n, orig.data() + (b + 1) * n);
    std::vector<float> y(batch.data() + b * n, batch.data() + (b + 1) * n);
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    EXPECT_EQ(x, y);
  }
  EXPECT_EQ(batch.shape(), orig.shape());
}

}  // namespace
}  // namespace ecat::train
