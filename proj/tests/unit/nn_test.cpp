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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ecat/nn/gradcheck.hpp"
#include "ecat/nn/layers.hpp"
#include "ecat/nn/ops.hpp"
#include "ecat/nn/rng.hpp"

namespace ecat::nn {
namespace {

template <typename T = double>
Tensor<T> Random(Shape shape, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Tensor<T> t(std::move(shape));
  for (auto& v : t.values()) v = static_cast<T>(rng.Normal() * scale);
  return t;
}

// Scalar probe <f(x), r> with a fixed random r, so every output element
// contributes a distinct weight to the checked gradient.
Var<double> Probe(Var<double> y, std::uint64_t seed) {
  Tape<double>& tape = *y.tape;
  return Sum(Mul(y, tape.Constant(Random(y.shape(), seed))));
}

double Dot(const Tensor<float>& a, const Tensor<float>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += double(a[i]) * b[i];
  return s;
}

// --- conv2d ----------------------------------------------------------------

TEST(Conv2d, StrideTwoHalvesExtent) {
  Tape<float> tape(false);
  auto x = tape.Constant(Tensor<float>(Shape{1, 64, 64, 3}));
  auto w = tape.Constant(Tensor<float>(Shape{32, 5, 5, 3}));
  auto b = tape.Constant(Tensor<float>(Shape{32}));
  auto y = Conv2d(x, w, b, ConvGeometry{5, 2, 2, 0});
  EXPECT_EQ(y.shape(), (Shape{1, 32, 32, 32}));
}

TEST(Conv2d, ScalarAffine) {
  Tape<float> tape(false);
  auto x = tape.Constant(Tensor<float>(Shape{1, 1, 1, 1}, 3.0f));
  auto w = tape.Constant(Tensor<float>(Shape{1, 1, 1, 1}, 2.0f));
  auto b = tape.Constant(Tensor<float>(Shape{1}, 0.5f));
  auto y = Conv2d(x, w, b, ConvGeometry{1, 1, 0, 0});
  EXPECT_FLOAT_EQ(y.value()[0], 6.5f);
}

TEST(Conv2d, RejectsNonDivisibleExtent) {
  Tape<float> tape(false);
  auto x = tape.Constant(Tensor<float>(Shape{1, 7, 8, 2}));
  auto w = tape.Constant(Tensor<float>(Shape{3, 5, 5, 2}));
  auto b = tape.Constant(Tensor<float>(Shape{3}));
  EXPECT_THROW(Conv2d(x, w, b, ConvGeometry{5, 2, 2, 0}), ShapeError);
}

TEST(Conv2d, RejectsChannelMismatch) {
  Tape<float> tape(false);
  auto x = tape.Constant(Tensor<float>(Shape{1, 8, 8, 2}));
  auto w = tape.Constant(Tensor<float>(Shape{3, 5, 5, 4}));
  auto b = tape.Constant(Tensor<float>(Shape{3}));
  EXPECT_THROW(Conv2d(x, w, b, ConvGeometry{5, 2, 2, 0}), ShapeError);
}

TEST(Conv2d, GradientMatchesFiniteDifferences) {
  const ConvGeometry g{5, 2, 2, 0};
  ScalarFn f = [&](Tape<double>&, std::span<const Var<double>> in) {
    return Probe(Conv2d(in[0], in[1], in[2], g), 11);
  };
  auto report = GradientCheck(
      f, {Random(Shape{1, 8, 8, 2}, 1), Random(Shape{3, 5, 5, 2}, 2),
          Random(Shape{3}, 3)},
      1e-6);
  EXPECT_TRUE(report.passed) << report.Summary();
}

TEST(Conv2d, GradientStrideOne3x3) {
  const ConvGeometry g{3, 1, 1, 0};
  ScalarFn f = [&](Tape<double>&, std::span<const Var<double>> in) {
    return Probe(Conv2d(in[0], in[1], in[2], g), 12);
  };
  auto report = GradientCheck(
      f, {Random(Shape{2, 4, 4, 3}, 4), Random(Shape{2, 3, 3, 3}, 5),
          Random(Shape{2}, 6)},
      1e-6);
  EXPECT_TRUE(report.passed) << report.Summary();
}

// --- deconv2d --------------------------------------------------------------

TEST(Deconv2d, StrideTwoDoublesExtent) {
  Tape<float> tape(false);
  auto x = tape.Constant(Tensor<float>(Shape{1, 4, 4, 6}));
  auto w = tape.Constant(Tensor<float>(Shape{6, 5, 5, 5}));
  auto b = tape.Constant(Tensor<float>(Shape{5}));
  auto y = Deconv2d(x, w, b, ConvGeometry{5, 2, 2, 1});
  EXPECT_EQ(y.shape(), (Shape{1, 8, 8, 5}));
}

TEST(Deconv2d, AdjointOfConv) {
  const ConvGeometry conv{5, 2, 2, 0};
  const ConvGeometry deconv{5, 2, 2, 1};
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    // conv: [1,8,8,3] -> [1,4,4,2] with w [2,5,5,3]; the deconv with the
    // same tensor read as [Cin=2, k, k, Cout=3] maps back.
    auto x = Random<float>(Shape{1, 8, 8, 3}, 1000 + trial);
    auto y = Random<float>(Shape{1, 4, 4, 2}, 2000 + trial);
    auto w = Random<float>(Shape{2, 5, 5, 3}, 3000 + trial);
    Tape<float> tape(false);
    auto cx = Conv2d(tape.Constant(x), tape.Constant(w),
                     tape.Constant(Tensor<float>(Shape{2})), conv);
    auto dy = Deconv2d(tape.Constant(y), tape.Constant(w),
                       tape.Constant(Tensor<float>(Shape{3})), deconv);
    const double lhs = Dot(cx.value(), y);
    const double rhs = Dot(x, dy.value());
    EXPECT_NEAR(lhs, rhs, 1e-5 * std::max(1.0, std::abs(lhs))) << "trial " << trial;
  }
}

TEST(Deconv2d, GradientMatchesFiniteDifferences) {
  const ConvGeometry g{5, 2, 2, 1};
  ScalarFn f = [&](Tape<double>&, std::span<const Var<double>> in) {
    return Probe(Deconv2d(in[0], in[1], in[2], g), 13);
  };
  auto report = GradientCheck(
      f, {Random(Shape{1, 4, 4, 2}, 7), Random(Shape{2, 5, 5, 3}, 8),
          Random(Shape{3}, 9)},
      1e-6);
  EXPECT_TRUE(report.passed) << report.Summary();
}

// --- activations -----------------------------------------------------------

TEST(LeakyRelu, Values) {
  Tape<float> tape(false);
  auto y = LeakyRelu(tape.Constant(Tensor<float>(Shape{3}, {2.0f, -1.0f, 0.0f})),
                     0.01f);
  EXPECT_FLOAT_EQ(y.value()[0], 2.0f);
  EXPECT_FLOAT_EQ(y.value()[1], -0.01f);
  EXPECT_FLOAT_EQ(y.value()[2], 0.0f);
}

TEST(LeakyRelu, RejectsSlopeOutsideUnitInterval) {
  Tape<float> tape(false);
  auto x = tape.Constant(Tensor<float>(Shape{1}));
  EXPECT_THROW(LeakyRelu(x, 1.5f), std::invalid_argument);
  EXPECT_THROW(LeakyRelu(x, 0.0f), std::invalid_argument);
}

TEST(LeakyRelu, GradientAwayFromKink) {
  ScalarFn f = [](Tape<double>&, std::span<const Var<double>> in) {
    return Probe(LeakyRelu(in[0], 0.01), 14);
  };
  auto x = Random(Shape{4, 5}, 10);
  x[0] = 0.0;  // the kink itself must be skipped
  GradCheckOptions opts;
  opts.skip = [](std::size_t, std::size_t, double v) {
    return std::abs(v) < 1e-4;
  };
  auto report = GradientCheck(f, {x}, 1e-5, opts);
  EXPECT_TRUE(report.passed) << report.Summary();
  EXPECT_EQ(report.inputs[0].skipped, 1u);
}

TEST(Gelu, GradientMatchesFiniteDifferences) {
  ScalarFn f = [](Tape<double>&, std::span<const Var<double>> in) {
    return Probe(Gelu(in[0]), 15);
  };
  auto report = GradientCheck(f, {Random(Shape{3, 7}, 11)}, 1e-5);
  EXPECT_TRUE(report.passed) << report.Summary();
}

TEST(Softplus, ValueAndGradient) {
  Tape<double> tape(false);
  auto y = Softplus(tape.Constant(Tensor<double>(Shape{1}, 0.0)), 1e-6);
  EXPECT_NEAR(y.value()[0], std::log(2.0) + 1e-6, 1e-15);
  ScalarFn f = [](Tape<double>&, std::span<const Var<double>> in) {
    return Probe(Softplus(in[0], 1e-6), 16);
  };
  auto report = GradientCheck(f, {Random(Shape{10}, 12, 3.0)}, 1e-5);
  EXPECT_TRUE(report.passed) << report.Summary();
}

// --- layer norm ------------------------------------------------------------

TEST(LayerNorm, ConstantTokenCollapsesToBeta) {
  Tape<float> tape(false);
  auto y = LayerNorm(tape.Constant(Tensor<float>(Shape{1, 4}, 5.0f)),
                     tape.Constant(Tensor<float>(Shape{4}, 1.0f)),
                     tape.Constant(Tensor<float>(Shape{4}, 0.0f)), 1e-6f);
  for (float v : y.value().values()) EXPECT_FLOAT_EQ(v, 0.0f);
}

TEST(LayerNorm, TwoElementSymmetry) {
  Tape<double> tape(false);
  auto y = LayerNorm(tape.Constant(Tensor<double>(Shape{1, 2}, {1.0, 3.0})),
                     tape.Constant(Tensor<double>(Shape{2}, 1.0)),
                     tape.Constant(Tensor<double>(Shape{2}, 0.0)), 1e-12);
  EXPECT_NEAR(y.value()[0], -1.0, 1e-9);
  EXPECT_NEAR(y.value()[1], 1.0, 1e-9);
}

TEST(LayerNorm, PreAffineMomentsPerToken) {
  Tape<double> tape(false);
  auto x = Random(Shape{2, 5, 16}, 13, 4.0);
  auto y = LayerNorm(tape.Constant(x), tape.Constant(Tensor<double>(Shape{16}, 1.0)),
                     tape.Constant(Tensor<double>(Shape{16}, 0.0)), 1e-6);
  for (std::size_t t = 0; t < 10; ++t) {
    double mean = 0.0, var = 0.0;
    for (std::size_t c = 0; c < 16; ++c) mean += y.value()[t * 16 + c];
    mean /= 16;
    for (std::size_t c = 0; c < 16; ++c) {
      const double d = y.value()[t * 16 + c] - mean;
      var += d * d;
    }
    var /= 16;
    EXPECT_LT(std::abs(mean), 1e-6);
    EXPECT_LT(std::abs(var - 1.0), 1e-4);
  }
}

TEST(LayerNorm, GradientMatchesFiniteDifferences) {
  ScalarFn f = [](Tape<double>&, std::span<const Var<double>> in) {
    return Probe(LayerNorm(in[0], in[1], in[2], 1e-6), 17);
  };
  auto report = GradientCheck(
      f, {Random(Shape{3, 6}, 14), Random(Shape{6}, 15), Random(Shape{6}, 16)},
      1e-6);
  EXPECT_TRUE(report.passed) << report.Summary();
}

// --- attention -------------------------------------------------------------

TEST(Attention, SingleTokenReturnsValueProjection) {
  Tape<double> tape(false);
  auto qkv = Random(Shape{1, 1, 12}, 17);
  auto y = SelfAttention(tape.Constant(qkv), 2);
  auto probs = AttentionProbabilities(qkv, 2);
  for (double p : probs.values()) EXPECT_DOUBLE_EQ(p, 1.0);
  for (std::size_t c = 0; c < 4; ++c) EXPECT_DOUBLE_EQ(y.value()[c], qkv[8 + c]);
}

TEST(Attention, ZeroQueryKeyIsUniformMeanOfValues) {
  const std::int64_t t = 5, c = 8;
  Tape<double> tape(false);
  auto x = Random(Shape{1, t, c}, 18);
  auto w = Random(Shape{3 * c, c}, 19);
  for (std::int64_t r = 0; r < 2 * c; ++r) {
    for (std::int64_t k = 0; k < c; ++k) w[r * c + k] = 0.0;
  }
  auto qkv = Linear(tape.Constant(x), tape.Constant(w),
                    tape.Constant(Tensor<double>(Shape{3 * c})));
  auto y = SelfAttention(qkv, 2);
  const auto probs = AttentionProbabilities(qkv.value(), 2);
  for (double p : probs.values()) {
    EXPECT_NEAR(p, 1.0 / t, 1e-15);
  }
  for (std::int64_t k = 0; k < c; ++k) {
    double mean = 0.0;
    for (std::int64_t i = 0; i < t; ++i) mean += qkv.value()[i * 3 * c + 2 * c + k];
    mean /= t;
    for (std::int64_t i = 0; i < t; ++i) {
      EXPECT_NEAR(y.value()[i * c + k], mean, 1e-12);
    }
  }
}

TEST(Attention, RowsSumToOne) {
  auto probs = AttentionProbabilities(Random(Shape{2, 6, 24}, 20, 3.0), 4);
  for (std::size_t r = 0; r < probs.size() / 6; ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < 6; ++j) s += probs[r * 6 + j];
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Attention, RejectsIndivisibleHeads) {
  Tape<double> tape(false);
  EXPECT_THROW(SelfAttention(tape.Constant(Tensor<double>(Shape{1, 2, 15})), 2),
               ShapeError);
}

TEST(Attention, GradientThroughProjections) {
  // T=3, C=4, heads=2, including both projections.
  ScalarFn f = [](Tape<double>&, std::span<const Var<double>> in) {
    auto qkv = Linear(in[0], in[1], in[2]);
    return Probe(Linear(SelfAttention(qkv, 2), in[3], in[4]), 18);
  };
  auto report = GradientCheck(
      f, {Random(Shape{1, 3, 4}, 21), Random(Shape{12, 4}, 22),
          Random(Shape{12}, 23), Random(Shape{4, 4}, 24), Random(Shape{4}, 25)},
      1e-5);
  EXPECT_TRUE(report.passed) << report.Summary();
}

// --- feed-forward ----------------------------------------------------------

Var<double> Ffn(std::span<const Var<double>> in) {
  return Linear(Gelu(Linear(in[0], in[1], in[2])), in[3], in[4]);
}

TEST(FeedForward, ZeroWeightsGiveZero) {
  Tape<double> tape(false);
  const std::vector<Var<double>> in = {
      tape.Constant(Random(Shape{1, 3, 4}, 26)),
      tape.Constant(Tensor<double>(Shape{16, 4})),
      tape.Constant(Tensor<double>(Shape{16})),
      tape.Constant(Tensor<double>(Shape{4, 16})),
      tape.Constant(Tensor<double>(Shape{4}))};
  for (double v : Ffn(in).value().values()) EXPECT_EQ(v, 0.0);
}

TEST(FeedForward, CopyWeightsReproduceScaledInput) {
  // GELU(u) - GELU(-u) = u, so hidden rows [I; -I] and output [sI, -sI]
  // reproduce s * x.
  const std::int64_t c = 4, h = 16;
  const double s = 2.5;
  Tensor<double> w1(Shape{h, c}), w2(Shape{c, h});
  for (std::int64_t i = 0; i < c; ++i) {
    w1[i * c + i] = 1.0;
    w1[(c + i) * c + i] = -1.0;
    w2[i * h + i] = s;
    w2[i * h + c + i] = -s;
  }
  Tape<double> tape(false);
  auto x = Random(Shape{1, 3, c}, 27);
  const std::vector<Var<double>> in = {
      tape.Constant(x), tape.Constant(w1), tape.Constant(Tensor<double>(Shape{h})),
      tape.Constant(w2), tape.Constant(Tensor<double>(Shape{c}))};
  auto y = Ffn(in);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y.value()[i], s * x[i], 1e-12);
}

TEST(FeedForward, GradientMatchesFiniteDifferences) {
  ScalarFn f = [](Tape<double>&, std::span<const Var<double>> in) {
    return Probe(Ffn(in), 19);
  };
  auto report = GradientCheck(
      f, {Random(Shape{1, 3, 4}, 28), Random(Shape{16, 4}, 29),
          Random(Shape{16}, 30), Random(Shape{4, 16}, 31), Random(Shape{4}, 32)},
      1e-5);
  EXPECT_TRUE(report.passed) << report.Summary();
}

// --- softmax ---------------------------------------------------------------

TEST(Softmax, Symmetric) {
  const std::vector<double> x = {0.0, 0.0};
  auto p = Softmax<double>(x);
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
}

TEST(Softmax, StableForLargeLogits) {
  const std::vector<double> x = {1000.0, 0.0};
  auto p = Softmax<double>(x);
  EXPECT_NEAR(p[0], 1.0, 1e-12);
  EXPECT_NEAR(p[1], 0.0, 1e-12);
  EXPECT_TRUE(std::isfinite(p[0]) && std::isfinite(p[1]));
}

TEST(Softmax, LogsOfIntegers) {
  const std::vector<double> x = {std::log(1.0), std::log(2.0), std::log(3.0)};
  auto p = Softmax<double>(x);
  EXPECT_NEAR(p[0], 1.0 / 6, 1e-15);
  EXPECT_NEAR(p[1], 2.0 / 6, 1e-15);
  EXPECT_NEAR(p[2], 3.0 / 6, 1e-15);
}

TEST(Softmax, SumsToOneAndPermutationEquivariant) {
  Rng rng(33);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<float> x(9);
    for (auto& v : x) v = static_cast<float>(rng.Normal() * 10.0);
    auto p = Softmax<float>(x);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-6);
    std::vector<float> xr(x.rbegin(), x.rend());
    auto pr = Softmax<float>(xr);
    for (std::size_t i = 0; i < x.size(); ++i) {
      EXPECT_FLOAT_EQ(p[i], pr[x.size() - 1 - i]);
      EXPECT_GE(p[i], 0.0f);
    }
  }
}

// --- backward --------------------------------------------------------------

TEST(Backward, LinearCase) {
  Parameter<double> w("w", Random(Shape{5}, 34));
  auto x = Random(Shape{5}, 35);
  Tape<double> tape;
  tape.Backward(Sum(Mul(tape.Param(w), tape.Constant(x))));
  for (std::size_t i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(w.grad[i], x[i]);
}

TEST(Backward, QuadraticCase) {
  Parameter<double> w("w", Random(Shape{2, 3}, 36));
  Tape<double> tape;
  auto v = tape.Param(w);
  tape.Backward(Sum(Mul(v, v)));
  for (std::size_t i = 0; i < 6; ++i) EXPECT_DOUBLE_EQ(w.grad[i], 2.0 * w.value[i]);
}

TEST(Backward, SharedParameterAccumulatesWithinPass) {
  Parameter<double> w("w", Tensor<double>(Shape{1}, 3.0));
  Tape<double> tape;
  // w used through two separate reads: d(2w + 5w)/dw = 7.
  auto a = Scale(tape.Param(w), 2.0);
  auto b = Scale(tape.Param(w), 5.0);
  tape.Backward(Sum(Add(a, b)));
  EXPECT_DOUBLE_EQ(w.grad[0], 7.0);
}

TEST(Backward, RepeatedCallsAccumulate) {
  Parameter<double> w("w", Tensor<double>(Shape{2}, {1.0, -2.0}));
  Tape<double> tape;
  auto v = tape.Param(w);
  auto loss = Sum(Mul(v, v));
  tape.Backward(loss);
  tape.Backward(loss);
  EXPECT_DOUBLE_EQ(w.grad[0], 4.0);
  EXPECT_DOUBLE_EQ(w.grad[1], -8.0);
  w.ZeroGrad();
  EXPECT_DOUBLE_EQ(w.grad[0], 0.0);
}

TEST(Backward, RejectsNonScalarLoss) {
  Tape<double> tape;
  auto x = tape.Leaf(Tensor<double>(Shape{2}, 1.0));
  EXPECT_THROW(tape.Backward(x), ShapeError);
}

TEST(Tape, NonFiniteOutputIsAnError) {
  Tape<float> tape(false);
  auto x = tape.Constant(Tensor<float>(Shape{1}, 1e30f));
  EXPECT_THROW(Mul(x, x), NonFiniteError);
}

// --- gradient checker ------------------------------------------------------

TEST(GradientCheck, DetectsCorruptedGradient) {
  const ConvGeometry g{5, 2, 2, 0};
  ScalarFn f = [&](Tape<double>&, std::span<const Var<double>> in) {
    return Probe(Conv2d(in[0], in[1], in[2], g), 37);
  };
  const std::vector<Tensor<double>> inputs = {
      Random(Shape{1, 8, 8, 2}, 38), Random(Shape{3, 5, 5, 2}, 39),
      Random(Shape{3}, 40)};
  auto analytic = AnalyticGradients(f, inputs);
  EXPECT_TRUE(CompareGradients(f, inputs, analytic, 1e-5).passed);
  for (auto& v : analytic[1].values()) v *= 1.1;
  auto report = CompareGradients(f, inputs, analytic, 1e-5);
  EXPECT_FALSE(report.passed);
  EXPECT_GT(report.inputs[1].max_rel_error, 0.05);
}

TEST(ParameterGradientCheck, RefinementStepsOverKink) {
  // p[0] sits 3e-6 above the kink, inside the default step.
  Parameter<double> p("p", Tensor<double>(Shape{3}, 0.5));
  p.value[0] = 3e-6;
  ParamLossFn f = [&](Tape<double>& tape) { return Sum(LeakyRelu(tape.Param(p), 0.01)); };
  Parameter<double>* params[] = {&p};
  EXPECT_FALSE(ParameterGradientCheck(f, params, 1e-3).passed);
  GradCheckOptions opts;
  opts.refinements = 2;
  auto report = ParameterGradientCheck(f, params, 1e-3, opts);
  EXPECT_TRUE(report.passed) << report.Summary();
  EXPECT_EQ(report.inputs[0].refined, 1u);
}

TEST(ParameterGradientCheck, RefinementDoesNotRescueWrongGradient) {
  // The second factor is a constant copy, so the tape gradient is p, not 2p.
  Parameter<double> p("p", Tensor<double>(Shape{4}, 0.8));
  ParamLossFn f = [&](Tape<double>& tape) {
    return Sum(Mul(tape.Param(p), tape.Constant(p.value)));
  };
  Parameter<double>* params[] = {&p};
  GradCheckOptions opts;
  opts.refinements = 4;
  auto report = ParameterGradientCheck(f, params, 1e-3, opts);
  EXPECT_FALSE(report.passed);
  EXPECT_NEAR(report.inputs[0].max_rel_error, 0.5, 1e-6);
}

TEST(GradientCheck, RelativeErrorUsesFloor) {
  EXPECT_NEAR(RelativeError(1.0, 1.1, 1e-3), 0.1 / 1.1, 1e-12);
  EXPECT_DOUBLE_EQ(RelativeError(0.0, 1e-6, 1e-3), 1e-3);
}

// --- determinism -----------------------------------------------------------

TEST(Determinism, ForwardIsBitIdentical) {
  Conv2dLayer<float> conv("c", 3, 8, ConvGeometry{5, 2, 2, 0});
  Rng rng(41);
  conv.Init(rng, true);
  auto x = Random<float>(Shape{2, 16, 16, 3}, 42);
  Tape<float> t1(false), t2(false);
  auto y1 = conv(t1, t1.Constant(x));
  auto y2 = conv(t2, t2.Constant(x));
  EXPECT_TRUE(y1.value() == y2.value());
}

TEST(Rng, DeriveSeedSeparatesStreams) {
  EXPECT_NE(DeriveSeed(1, {0}), DeriveSeed(1, {1}));
  EXPECT_NE(DeriveSeed(1, {0}), DeriveSeed(2, {0}));
  EXPECT_EQ(DeriveSeed(7, {3, 4}), DeriveSeed(7, {3, 4}));
}

}  // namespace
}  // namespace ecat::nn
