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
#include <numbers>

#include "ecat/entropy/bitstream.hpp"
#include "ecat/entropy/hyperprior.hpp"
#include "ecat/entropy/likelihood.hpp"
#include "ecat/entropy/range_coder.hpp"
#include "ecat/entropy/tables.hpp"
#include "ecat/eval/dataset.hpp"
#include "ecat/model/codec.hpp"
#include "ecat/nn/gradcheck.hpp"
#include "ecat/nn/rng.hpp"

namespace ecat::entropy {
namespace {

using nn::Shape;
using nn::Tensor;

// Oracles.

double SimpsonNormal(double a, double b, int n = 2000) {
  const double h = (b - a) / n;
  auto pdf = [](double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  };
  double s = pdf(a) + pdf(b);
  for (int i = 1; i < n; ++i) s += pdf(a + i * h) * (i % 2 ? 4 : 2);
  return s * h / 3.0;
}

double Phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double NaiveGaussianBin(double v, double mu, double sigma) {
  return std::max(1e-9, Phi((v - mu + 0.5) / sigma) - Phi((v - mu - 0.5) / sigma));
}

double NaiveLogisticBin(double k, double loc, double s) {
  return std::max(1e-9, Sigmoid((k - loc + 0.5) / s) - Sigmoid((k - loc - 0.5) / s));
}

template <typename F>
void ForEachParam(HyperPrior<float>& hyper, F&& f) {
  hyper.Visit([&](nn::Parameter<float>& p) { f(p); });
}

// --- hyper networks --------------------------------------------------------

TEST(HyperPrior, DeskShapes) {
  const ModelConfig cfg = ModelConfig::Desk();
  HyperPrior<float> hp(cfg);
  nn::Rng rng(1);
  hp.Init(rng);
  nn::Tape<float> tape(false);
  auto h = hp.Encode(tape, tape.Constant(rng.NormalTensor<float>(Shape{1, 4, 4, 48}, 1.0)));
  EXPECT_EQ(h.shape(), (Shape{1, 1, 1, 32}));
  auto g = hp.Decode(tape, h, 4, 4);
  EXPECT_EQ(g.mu.shape(), (Shape{1, 4, 4, 48}));
  EXPECT_EQ(g.sigma.shape(), (Shape{1, 4, 4, 48}));
}

TEST(HyperPrior, PaperShapesWithPadding) {
  const ModelConfig cfg = ModelConfig::Paper();
  HyperPrior<float> hp(cfg);
  nn::Rng rng(2);
  hp.Init(rng);
  nn::Tape<float> tape(false);
  auto h = hp.Encode(tape, tape.Constant(rng.NormalTensor<float>(Shape{1, 14, 14, 192}, 1.0)));
  EXPECT_EQ(h.shape(), (Shape{1, 4, 4, 128}));
  auto g = hp.Decode(tape, h, 14, 14);
  EXPECT_EQ(g.mu.shape(), (Shape{1, 14, 14, 192}));
}

TEST(HyperPrior, ZeroInputZeroBiasGivesZero) {
  HyperPrior<float> hp(ModelConfig::Desk());
  nn::Rng rng(3);
  hp.Init(rng);
  ForEachParam(hp, [](nn::Parameter<float>& p) {
    if (p.value.rank() == 1) p.value.Fill(0.0f);
  });
  nn::Tape<float> tape(false);
  auto h = hp.Encode(tape, tape.Constant(Tensor<float>(Shape{1, 4, 4, 48})));
  for (float v : h.value().values()) EXPECT_EQ(v, 0.0f);
}

TEST(HyperPrior, ZeroWeightsGiveLn2Sigma) {
  HyperPrior<float> hp(ModelConfig::Desk());
  ForEachParam(hp, [](nn::Parameter<float>& p) { p.value.Fill(0.0f); });
  nn::Rng rng(4);
  nn::Tape<float> tape(false);
  auto g = hp.Decode(tape, tape.Constant(rng.NormalTensor<float>(Shape{1, 1, 1, 32}, 1.0)), 4, 4);
  for (float v : g.mu.value().values()) EXPECT_EQ(v, 0.0f);
  for (float v : g.sigma.value().values()) EXPECT_NEAR(v, std::log(2.0) + 1e-6, 1e-6);
}

TEST(HyperPrior, SigmaAboveFloor) {
  HyperPrior<float> hp(ModelConfig::Desk());
  nn::Rng rng(5);
  hp.Init(rng);
  nn::Tape<float> tape(false);
  auto h = rng.NormalTensor<float>(Shape{3, 1, 1, 32}, 1.0);
  for (auto& v : h.values()) v *= 50.0f;
  auto g = hp.Decode(tape, tape.Constant(h), 4, 4);
  for (float v : g.sigma.value().values()) EXPECT_GE(v, 1e-6f);
}

// --- likelihoods -----------------------------------------------------------

TEST(Likelihood, GaussianUnitBin) {
  const double p = GaussianBinLikelihood(0.0, 0.0, 1.0);
  EXPECT_NEAR(p, SimpsonNormal(-0.5, 0.5), 1e-10);
  EXPECT_NEAR(p, 0.382925, 1e-6);
  EXPECT_NEAR(BitsFromLikelihood(p), 1.3849, 1e-4);
}

TEST(Likelihood, GaussianPointMass) {
  EXPECT_NEAR(GaussianBinLikelihood(3.0, 3.0, 1e-6), 1.0, 1e-12);
  EXPECT_NEAR(BitsFromLikelihood(GaussianBinLikelihood(3.0, 3.0, 1e-6)), 0.0, 1e-10);
}

TEST(Likelihood, GaussianClampsFarTail) {
  const double p = GaussianBinLikelihood(100.0, 0.0, 1.0);
  EXPECT_EQ(p, kLikelihoodFloor);
  EXPECT_NEAR(BitsFromLikelihood(p), 29.897, 1e-3);
}

TEST(Likelihood, GaussianMatchesErfOracle) {
  nn::Rng rng(6);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::round(rng.Uniform(-8, 8));
    const double mu = rng.Uniform(-4, 4);
    const double s = std::exp(rng.Uniform(-3, 2.5));
    const double want = NaiveGaussianBin(v, mu, s);
    EXPECT_NEAR(GaussianBinLikelihood(v, mu, s), want, 1e-9 * want + 1e-14);
  }
}

TEST(Likelihood, WideningSigmaLowersCentreBin) {
  double prev = 2.0;
  for (double s = 0.05; s < 50.0; s *= 1.3) {
    const double p = GaussianBinLikelihood(1.0, 1.0, s);
    EXPECT_LT(p, prev);
    prev = p;
  }
}

TEST(Likelihood, LogisticUnitBin) {
  const double want = 2.0 * Sigmoid(0.5) - 1.0;
  EXPECT_NEAR(LogisticBinLikelihood(0.0, 0.0, 1.0), want, 1e-12);
  EXPECT_NEAR(want, 0.244919, 1e-6);
}

TEST(Likelihood, LogisticSymmetry) {
  nn::Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const double k = std::round(rng.Uniform(-10, 10));
    const double loc = rng.Uniform(-3, 3);
    const double s = std::exp(rng.Uniform(-2, 2));
    EXPECT_NEAR(LogisticBinLikelihood(k, loc, s), LogisticBinLikelihood(-k, -loc, s),
                1e-12);
    EXPECT_NEAR(LogisticBinLikelihood(k, loc, s), NaiveLogisticBin(k, loc, s), 1e-12);
  }
}

TEST(Likelihood, LogisticSumsToOne) {
  for (double s : {0.3, 1.0, 7.0}) {
    double sum = 0.0;
    for (int k = -1000; k <= 1000; ++k) {
      sum += std::exp(LogisticLogBin(k - 0.37, std::log(s)).log_p);
    }
    EXPECT_NEAR(sum, 1.0, 1e-6) << "scale " << s;
  }
}

TEST(Likelihood, RateGradientsMatchFiniteDifferences) {
  nn::ScalarFn gauss = [](nn::Tape<double>&, std::span<const nn::Var<double>> in) {
    return nn::Sum(GaussianRateBits(in[0], in[1], in[2]));
  };
  nn::Rng rng(8);
  Tensor<double> v(Shape{12}), mu(Shape{12}), sigma(Shape{12});
  for (std::size_t i = 0; i < 12; ++i) {
    v[i] = rng.Uniform(-3, 3);
    mu[i] = rng.Uniform(-2, 2);
    sigma[i] = rng.Uniform(0.3, 3.0);
  }
  auto r1 = nn::GradientCheck(gauss, {v, mu, sigma}, 1e-5);
  EXPECT_TRUE(r1.passed) << r1.Summary();

  nn::ScalarFn logistic = [](nn::Tape<double>&, std::span<const nn::Var<double>> in) {
    return nn::Sum(LogisticRateBits(in[0], in[1], in[2]));
  };
  Tensor<double> ls(Shape{12});
  for (auto& x : ls.values()) x = rng.Uniform(-1, 1);
  auto r2 = nn::GradientCheck(logistic, {v, mu, ls}, 1e-5);
  EXPECT_TRUE(r2.passed) << r2.Summary();
}

// --- tables ----------------------------------------------------------------

TEST(Tables, TwoSymbolHalves) {
  const std::vector<double> p = {0.5, 0.5};
  const CdfTable t = QuantizeDistribution(p, -1);
  EXPECT_EQ(t.cdf, (std::vector<std::uint32_t>{0, 32768, 65536}));
  EXPECT_EQ(t.min_symbol, -1);
  EXPECT_EQ(t.max_symbol(), 0);
}

TEST(Tables, TinyProbabilityGetsFrequencyOne) {
  const std::vector<double> p = {1e-12, 1.0 - 2e-12, 1e-12};
  const CdfTable t = QuantizeDistribution(p, 0);
  EXPECT_EQ(t.Frequency(0), 1u);
  EXPECT_EQ(t.Frequency(2), 1u);
  EXPECT_EQ(t.cdf.back(), kTotalFrequency);
}

TEST(Tables, RejectsEmptyAlphabet) {
  EXPECT_THROW(QuantizeDistribution({}, 0), std::invalid_argument);
  EXPECT_THROW(BuildGaussianTables(std::vector<double>{0.0}, std::vector<double>{1.0}, 3, 2),
               std::invalid_argument);
}

TEST(Tables, MonotoneWithFullTotal) {
  nn::Rng rng(9);
  std::vector<double> mu(300), sigma(300);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    mu[i] = rng.Uniform(-6, 6);
    sigma[i] = std::exp(rng.Uniform(-5, 3));
  }
  const EntropyTables et = BuildGaussianTables(mu, sigma, -20, 20);
  for (const auto& t : et.tables) {
    ASSERT_EQ(t.size(), 41u);
    EXPECT_EQ(t.cdf.front(), 0u);
    EXPECT_EQ(t.cdf.back(), kTotalFrequency);
    for (std::size_t i = 0; i + 1 < t.cdf.size(); ++i) EXPECT_LT(t.cdf[i], t.cdf[i + 1]);
  }
}

TEST(Tables, QuantizationKlSmall) {
  nn::Rng rng(10);
  const int lo = -20, hi = 20;
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const double mu = rng.Uniform(-5, 5);
    const double s = std::exp(rng.Uniform(std::log(0.2), std::log(10.0)));
    const std::vector<double> m = {mu}, sg = {s};
    const CdfTable t = BuildGaussianTables(m, sg, lo, hi).tables[0];
    double kl = 0.0;
    for (int k = lo; k <= hi; ++k) {
      double p;
      if (k == lo) {
        p = Phi((k + 0.5 - mu) / s);
      } else if (k == hi) {
        p = 1.0 - Phi((k - 0.5 - mu) / s);
      } else {
        p = Phi((k + 0.5 - mu) / s) - Phi((k - 0.5 - mu) / s);
      }
      const double q = static_cast<double>(t.Frequency(k)) / kTotalFrequency;
      if (p > 0.0) kl += p * std::log2(p / q);
    }
    worst = std::max(worst, kl);
  }
  EXPECT_LT(worst, 1e-3);
}

TEST(Tables, LookupInvertsCdf) {
  const std::vector<double> p = {0.1, 0.2, 0.3, 0.4};
  const CdfTable t = QuantizeDistribution(p, 5);
  for (std::uint32_t x = 0; x < kTotalFrequency; x += 97) {
    const std::int32_t s = t.Lookup(x);
    const auto i = static_cast<std::size_t>(s - 5);
    EXPECT_LE(t.cdf[i], x);
    EXPECT_LT(x, t.cdf[i + 1]);
  }
}

// --- range coder -----------------------------------------------------------

CdfTable UniformTable(int a, std::int32_t min_symbol) {
  return QuantizeDistribution(std::vector<double>(static_cast<std::size_t>(a), 1.0),
                              min_symbol);
}

TEST(RangeCoder, DegenerateTableIsTiny) {
  const std::vector<double> p = {1e-12, 1.0};
  const CdfTable t = QuantizeDistribution(p, 0);
  const std::vector<std::int32_t> sym(1000000, 1);
  const auto bytes = RangeEncode(sym, t);
  EXPECT_LE(bytes.size(), 32u);
  EXPECT_EQ(RangeDecode(bytes, t, sym.size()), sym);
}

TEST(RangeCoder, DegenerateWideTableNearIdeal) {
  std::vector<double> p(16, 1e-12);
  p[3] = 1.0;
  const CdfTable t = QuantizeDistribution(p, 0);
  const std::vector<std::int32_t> sym(1000000, 3);
  const std::vector<std::uint32_t> ctx(sym.size(), 0);
  const EntropyTables et{{t}};
  const auto bytes = RangeEncode(sym, t);
  const double ideal = IdealCodeLength(sym, ctx, et);
  EXPECT_LE(8.0 * bytes.size(), 1.01 * ideal + 128.0) << "ideal bits " << ideal;
  EXPECT_EQ(RangeDecode(bytes, t, sym.size()), sym);
}

TEST(RangeCoder, Uniform256IsEightBitsPerSymbol) {
  const CdfTable t = UniformTable(256, 0);
  nn::Rng rng(11);
  std::vector<std::int32_t> sym(1000);
  for (auto& s : sym) s = static_cast<std::int32_t>(rng.Below(256));
  const auto bytes = RangeEncode(sym, t);
  const double bits = 8.0 * static_cast<double>(bytes.size());
  EXPECT_NEAR(bits, 8000.0, 0.01 * 8000.0 + 128.0);
  EXPECT_EQ(RangeDecode(bytes, t, sym.size()), sym);
}

TEST(RangeCoder, EmptyList) {
  const CdfTable t = UniformTable(4, 0);
  const auto bytes = RangeEncode(std::span<const std::int32_t>(), t);
  EXPECT_TRUE(bytes.empty());
  EXPECT_TRUE(RangeDecode(bytes, t, 0).empty());
}

TEST(RangeCoder, LengthWithinIdealBound) {
  nn::Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> mu(2000), sigma(2000);
    std::vector<std::uint32_t> ctx(2000);
    std::vector<std::int32_t> sym(2000);
    for (std::size_t i = 0; i < mu.size(); ++i) {
      mu[i] = rng.Uniform(-3, 3);
      sigma[i] = std::exp(rng.Uniform(-2, 2));
      ctx[i] = static_cast<std::uint32_t>(i);
      sym[i] = std::clamp(static_cast<std::int32_t>(std::lround(mu[i] + sigma[i] * rng.Normal())),
                          -15, 15);
    }
    const EntropyTables et = BuildGaussianTables(mu, sigma, -15, 15);
    const auto bytes = RangeEncode(sym, ctx, et);
    const double ideal = IdealCodeLength(sym, ctx, et);
    EXPECT_LE(8.0 * bytes.size(), ideal * 1.01 + 128.0);
    EXPECT_EQ(RangeDecode(bytes, ctx, et), sym);
  }
}

TEST(RangeCoder, RoundTripMillionSymbolsManySeeds) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    nn::Rng rng(1000 + seed);
    const int a = 2 + static_cast<int>(rng.Below(200));
    std::vector<double> p(static_cast<std::size_t>(a));
    for (auto& v : p) v = std::exp(3.0 * rng.Normal());
    const CdfTable t = QuantizeDistribution(p, -a / 2);
    std::vector<std::int32_t> sym(1000000);
    for (auto& s : sym) {
      s = t.Lookup(static_cast<std::uint32_t>(rng.Below(kTotalFrequency)));
    }
    const auto bytes = RangeEncode(sym, t);
    ASSERT_EQ(RangeDecode(bytes, t, sym.size()), sym) << "seed " << seed;
  }
}

TEST(RangeCoder, AlphabetBoundaries) {
  const CdfTable t = UniformTable(9, -4);
  for (std::int32_t v : {-4, 4}) {
    const std::vector<std::int32_t> sym(5000, v);
    EXPECT_EQ(RangeDecode(RangeEncode(sym, t), t, sym.size()), sym);
  }
}

TEST(RangeCoder, OutOfAlphabetSymbol) {
  const CdfTable t = UniformTable(9, -4);
  const std::vector<std::int32_t> sym = {0, 5};
  EXPECT_THROW(RangeEncode(sym, t), std::out_of_range);
}

TEST(RangeCoder, WrongCountIsAnError) {
  const CdfTable t = UniformTable(256, 0);
  nn::Rng rng(13);
  std::vector<std::int32_t> sym(500);
  for (auto& s : sym) s = static_cast<std::int32_t>(rng.Below(256));
  const auto bytes = RangeEncode(sym, t);
  EXPECT_THROW(RangeDecode(bytes, t, 300), CodingError);
  EXPECT_THROW(RangeDecode(bytes, t, 900), CodingError);
}

TEST(RangeCoder, TruncatedStreamIsAnError) {
  const CdfTable t = UniformTable(256, 0);
  nn::Rng rng(14);
  std::vector<std::int32_t> sym(500);
  for (auto& s : sym) s = static_cast<std::int32_t>(rng.Below(256));
  auto bytes = RangeEncode(sym, t);
  bytes.resize(bytes.size() / 2);
  EXPECT_THROW(RangeDecode(bytes, t, sym.size()), CodingError);
}

TEST(RangeCoder, Deterministic) {
  const CdfTable t = UniformTable(37, 0);
  nn::Rng rng(15);
  std::vector<std::int32_t> sym(3000);
  for (auto& s : sym) s = static_cast<std::int32_t>(rng.Below(37));
  EXPECT_EQ(RangeEncode(sym, t), RangeEncode(sym, t));
}

// --- rate estimate and bitstream -------------------------------------------

class StreamTest : public ::testing::Test {
 protected:
  void SetUp() override {
    model_.Init(21);
    data_ = eval::SynthesizeDataset(6, cfg_.input_h, cfg_.input_w, 22);
  }
  std::vector<LatentPack> Packs() {
    std::vector<std::size_t> idx(data_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return EncodeImages(model_, data_.Batch(idx));
  }
  ModelConfig cfg_ = ModelConfig::Desk();
  Model<float> model_{cfg_};
  eval::Dataset data_{cfg_.input_h, cfg_.input_w};
};

TEST_F(StreamTest, RoundTripIsExact) {
  for (const auto& pack : Packs()) {
    const auto bytes = Serialize(pack, model_.hyper(), cfg_);
    EXPECT_EQ(Deserialize(bytes, model_.hyper(), cfg_), pack);
  }
}

TEST_F(StreamTest, RoundTripRandomPacks) {
  nn::Rng rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    Tensor<std::int32_t> z(Shape{4, 4, 48}), h(Shape{1, 1, 32});
    const int zr = 1 + static_cast<int>(rng.Below(40));
    const int hr = 1 + static_cast<int>(rng.Below(10));
    for (auto& v : z.values()) v = static_cast<std::int32_t>(rng.Below(2 * zr + 1)) - zr;
    for (auto& v : h.values()) v = static_cast<std::int32_t>(rng.Below(2 * hr + 1)) - hr;
    const LatentPack pack = LatentPack::FromSymbols(z, h);
    const auto bytes = Serialize(pack, model_.hyper(), cfg_);
    ASSERT_EQ(Deserialize(bytes, model_.hyper(), cfg_), pack) << "trial " << trial;
  }
}

TEST_F(StreamTest, HeaderLayout) {
  const auto pack = Packs()[0];
  const auto bytes = Serialize(pack, model_.hyper(), cfg_);
  ASSERT_GE(bytes.size(), kHeaderBytes);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "ECAT");
  EXPECT_EQ(bytes[4], kStreamVersion);
  const StreamHeader hdr = ParseHeader(bytes);
  EXPECT_EQ(hdr.digest, cfg_.Digest());
  EXPECT_EQ(hdr.height, 64);
  EXPECT_EQ(hdr.width, 64);
  EXPECT_EQ(hdr.zmin, pack.zmin);
  EXPECT_EQ(hdr.hmax, pack.hmax);
}

TEST_F(StreamTest, CorruptionIsRejected) {
  const auto bytes = Serialize(Packs()[0], model_.hyper(), cfg_);
  auto bad_magic = bytes;
  bad_magic[0] ^= 0x20;
  EXPECT_THROW(Deserialize(bad_magic, model_.hyper(), cfg_), BitstreamError);
  auto bad_version = bytes;
  bad_version[4] = 9;
  EXPECT_THROW(Deserialize(bad_version, model_.hyper(), cfg_), BitstreamError);
  auto bad_digest = bytes;
  bad_digest[7] ^= 1;
  EXPECT_THROW(Deserialize(bad_digest, model_.hyper(), cfg_), BitstreamError);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  EXPECT_THROW(Deserialize(truncated, model_.hyper(), cfg_), BitstreamError);
  EXPECT_THROW(Deserialize(std::span(bytes).first(10), model_.hyper(), cfg_),
               BitstreamError);
}

TEST_F(StreamTest, RateEstimateMatchesNaiveOracle) {
  auto& hyper = model_.hyper();
  const auto& loc = hyper.prior().loc().value;
  const auto& ls = hyper.prior().log_scale().value;
  for (const auto& pack : Packs()) {
    const ElementGaussians g = PredictGaussians(hyper, pack.h, 4, 4);
    double want = 0.0;
    for (std::size_t i = 0; i < pack.h.size(); ++i) {
      const std::size_t c = i % 32;
      want -= std::log2(NaiveLogisticBin(pack.h[i], loc[c], std::exp(double(ls[c]))));
    }
    for (std::size_t i = 0; i < pack.z.size(); ++i) {
      want -= std::log2(NaiveGaussianBin(pack.z[i], g.mu[i], g.sigma[i]));
    }
    const double got = RateEstimate(pack, hyper);
    EXPECT_GE(got, 0.0);
    EXPECT_NEAR(got, want, 1e-6 * want);
  }
}

TEST_F(StreamTest, CodedBitsConformToEstimate) {
  for (const auto& pack : Packs()) {
    const auto bytes = Serialize(pack, model_.hyper(), cfg_);
    const double coded = 8.0 * static_cast<double>(bytes.size() - kHeaderBytes);
    const double est = RateEstimate(pack, model_.hyper());
    EXPECT_LE(std::abs(coded - est), 0.01 * est + 256.0)
        << "coded " << coded << " estimate " << est;
  }
}

TEST_F(StreamTest, CertainSymbolsCostNothing) {
  auto& hyper = model_.hyper();
  ForEachParam(hyper, [](nn::Parameter<float>& p) { p.value.Fill(0.0f); });
  // sigma = softplus(-60) + 1e-6: the zero bin holds all the mass.
  hyper.Visit([](nn::Parameter<float>& p) {
    if (p.name.find("dec2.bias") != std::string::npos) {
      for (std::size_t i = p.value.size() / 2; i < p.value.size(); ++i) p.value[i] = -60.0f;
    }
  });
  hyper.prior().log_scale().value.Fill(-30.0f);
  const LatentPack zero = LatentPack::FromSymbols(Tensor<std::int32_t>(Shape{4, 4, 48}),
                                                  Tensor<std::int32_t>(Shape{1, 1, 32}));
  EXPECT_NEAR(RateEstimate(zero, hyper), 0.0, 1e-9);

  // One hyper symbol sitting on its bin edge: p = 1/2.
  hyper.prior().loc().value[5] = 0.5f;
  EXPECT_NEAR(RateEstimate(zero, hyper), 1.0, 1e-9);
}

TEST(BitsPerPixel, KnownValue) {
  EXPECT_DOUBLE_EQ(BitsPerPixel(1024, 64, 64), 2.0);
}

TEST(LatentPack, ValidateBounds) {
  LatentPack p = LatentPack::FromSymbols(Tensor<std::int32_t>(Shape{4, 4, 48}, 2),
                                         Tensor<std::int32_t>(Shape{1, 1, 32}, -1));
  EXPECT_EQ(p.zmin, 2);
  EXPECT_EQ(p.hmax, -1);
  EXPECT_NO_THROW(p.Validate());
  p.z[0] = 3;
  EXPECT_THROW(p.Validate(), std::invalid_argument);
}

}  // namespace
}  // namespace ecat::entropy
