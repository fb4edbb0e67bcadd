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

#include "ecat/entropy/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ecat::entropy {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

double LogNormalPdf(double x) { return -0.5 * x * x - kHalfLog2Pi; }

double LogSigmoid(double x) {
  return x < 0.0 ? x - std::log1p(std::exp(x)) : -std::log1p(std::exp(-x));
}

double Sign(double x) { return (x > 0.0) - (x < 0.0); }

// log(exp(hi) - exp(lo)) for lo < hi.
double LogDiffExp(double hi, double lo) {
  return hi + std::log(-std::expm1(lo - hi));
}

}  // namespace

double NormalCdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double LogNormalCdf(double x) {
  if (x > 0.0) return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
  if (x > -30.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  // Asymptotic (Mills ratio) expansion; relative error < 1e-9 here.
  const double r = 1.0 / (x * x);
  return -0.5 * x * x - std::log(-x) - kHalfLog2Pi +
         std::log1p(-r + 3.0 * r * r - 15.0 * r * r * r);
}

LogBin GaussianLogBin(double offset, double sigma) {
  const double d = std::abs(offset);
  const double a = (0.5 - d) / sigma;
  const double b = (-0.5 - d) / sigma;
  const double log_p = LogDiffExp(LogNormalCdf(a), LogNormalCdf(b));
  const double ga = std::exp(LogNormalPdf(a) - log_p);
  const double gb = -std::exp(LogNormalPdf(b) - log_p);
  return LogBin{log_p, -Sign(offset) * (ga + gb) / sigma,
                -(a * ga + b * gb) / sigma};
}

LogBin LogisticLogBin(double offset, double log_scale) {
  const double s = std::exp(log_scale);
  const double d = std::abs(offset);
  const double u = (0.5 - d) / s;
  const double l = (-0.5 - d) / s;
  const double lu = LogSigmoid(u);
  const double ll = LogSigmoid(l);
  const double log_p = LogDiffExp(lu, ll);
  const double gu = std::exp(lu + LogSigmoid(-u) - log_p);
  const double gl = -std::exp(ll + LogSigmoid(-l) - log_p);
  return LogBin{log_p, -Sign(offset) * (gu + gl) / s, -(u * gu + l * gl)};
}

double GaussianBinLikelihood(double v, double mu, double sigma) {
  return std::max(std::exp(GaussianLogBin(v - mu, sigma).log_p),
                  kLikelihoodFloor);
}

double LogisticBinLikelihood(double k, double loc, double scale) {
  return std::max(std::exp(LogisticLogBin(k - loc, std::log(scale)).log_p),
                  kLikelihoodFloor);
}

namespace {

double ClampedBits(double log_p) {
  return -std::max(log_p, std::log(kLikelihoodFloor)) / std::numbers::ln2;
}

}  // namespace

template <typename T>
nn::Var<T> GaussianRateBits(nn::Var<T> v, nn::Var<T> mu, nn::Var<T> sigma) {
  if (v.shape() != mu.shape() || v.shape() != sigma.shape()) {
    throw nn::ShapeError("gaussian rate: shape mismatch");
  }
  const std::size_t n = v.value().size();
  nn::Tensor<T> d_offset(v.shape()), d_sigma(v.shape());
  double bits = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = static_cast<double>(sigma.value()[i]);
    if (!(s > 0.0)) throw std::domain_error("gaussian rate: sigma <= 0");
    const LogBin lb = GaussianLogBin(
        static_cast<double>(v.value()[i]) - static_cast<double>(mu.value()[i]),
        s);
    bits += ClampedBits(lb.log_p);
    d_offset[i] = static_cast<T>(-lb.d_offset / std::numbers::ln2);
    d_sigma[i] = static_cast<T>(-lb.d_scale / std::numbers::ln2);
  }
  const std::size_t vid = v.id, mid = mu.id, sid = sigma.id;
  const bool rg = v.requires_grad() || mu.requires_grad() || sigma.requires_grad();
  return v.tape->Record(
      nn::Tensor<T>::Scalar(static_cast<T>(bits)), rg,
      [=, d_offset = std::move(d_offset), d_sigma = std::move(d_sigma)](
          nn::Tape<T>& tape, std::size_t self) {
        const T g = tape.GradRef(self)[0];
        nn::Tensor<T> dv = d_offset;
        for (auto& x : dv.values()) x *= g;
        if (tape.requires_grad(mid)) {
          nn::Tensor<T> dm = dv;
          for (auto& x : dm.values()) x = -x;
          tape.Accumulate(mid, dm);
        }
        tape.Accumulate(vid, dv);
        if (tape.requires_grad(sid)) {
          nn::Tensor<T> ds = d_sigma;
          for (auto& x : ds.values()) x *= g;
          tape.Accumulate(sid, ds);
        }
      });
}

template <typename T>
nn::Var<T> LogisticRateBits(nn::Var<T> v, nn::Var<T> loc,
                            nn::Var<T> log_scale) {
  const nn::Shape& vs = v.shape();
  if (vs.empty()) throw nn::ShapeError("logistic rate: scalar input");
  const std::int64_t ch = vs.back();
  if (loc.shape() != nn::Shape{ch} || log_scale.shape() != nn::Shape{ch}) {
    throw nn::ShapeError("logistic rate: per-channel parameter mismatch");
  }
  const std::size_t n = v.value().size();
  nn::Tensor<T> d_offset(vs);
  nn::Tensor<T> d_loc(nn::Shape{ch}), d_ls(nn::Shape{ch});
  double bits = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % static_cast<std::size_t>(ch);
    const LogBin lb = LogisticLogBin(static_cast<double>(v.value()[i]) -
                                         static_cast<double>(loc.value()[c]),
                                     static_cast<double>(log_scale.value()[c]));
    bits += ClampedBits(lb.log_p);
    const double dof = -lb.d_offset / std::numbers::ln2;
    d_offset[i] = static_cast<T>(dof);
    d_loc[c] -= static_cast<T>(dof);
    d_ls[c] += static_cast<T>(-lb.d_scale / std::numbers::ln2);
  }
  const std::size_t vid = v.id, lid = loc.id, sid = log_scale.id;
  const bool rg =
      v.requires_grad() || loc.requires_grad() || log_scale.requires_grad();
  return v.tape->Record(
      nn::Tensor<T>::Scalar(static_cast<T>(bits)), rg,
      [=, d_offset = std::move(d_offset), d_loc = std::move(d_loc),
       d_ls = std::move(d_ls)](nn::Tape<T>& tape, std::size_t self) {
        const T g = tape.GradRef(self)[0];
        auto scaled = [g](nn::Tensor<T> t) {
          for (auto& x : t.values()) x *= g;
          return t;
        };
        if (tape.requires_grad(vid)) tape.Accumulate(vid, scaled(d_offset));
        if (tape.requires_grad(lid)) tape.Accumulate(lid, scaled(d_loc));
        if (tape.requires_grad(sid)) tape.Accumulate(sid, scaled(d_ls));
      });
}

template nn::Var<float> GaussianRateBits(nn::Var<float>, nn::Var<float>,
                                         nn::Var<float>);
template nn::Var<double> GaussianRateBits(nn::Var<double>, nn::Var<double>,
                                          nn::Var<double>);
template nn::Var<float> LogisticRateBits(nn::Var<float>, nn::Var<float>,
                                         nn::Var<float>);
template nn::Var<double> LogisticRateBits(nn::Var<double>, nn::Var<double>,
                                          nn::Var<double>);

}  // namespace ecat::entropy
