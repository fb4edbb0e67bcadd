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

// Unit-bin likelihoods of the two entropy models and their differentiable
// rate terms.
//
// Both models are evaluated in log space through the symmetric form
// p = F(1/2 - |v - mu|) - F(-1/2 - |v - mu|), which keeps tail bins accurate
// far beyond the point where the plain CDF difference cancels to zero.
// Reported likelihoods are clamped below at kLikelihoodFloor. The rate
// gradient is that of the unclamped -log2 p, so latents deep in a tail are
// still pulled toward the mode.

#ifndef ECAT_ENTROPY_LIKELIHOOD_HPP_
#define ECAT_ENTROPY_LIKELIHOOD_HPP_

#include <cmath>

#include "ecat/nn/tape.hpp"

namespace ecat::entropy {

inline constexpr double kLikelihoodFloor = 1e-9;
inline constexpr double kSigmaFloor = 1e-6;

// log p and its partials with respect to the signed offset v - mu and the
// scale argument (sigma for the Gaussian, log-scale for the logistic).
struct LogBin {
  double log_p;
  double d_offset;
  double d_scale;
};

LogBin GaussianLogBin(double offset, double sigma);
LogBin LogisticLogBin(double offset, double log_scale);

// P(v) for a unit bin centred on v under N(mu, sigma^2); >= 1e-9.
double GaussianBinLikelihood(double v, double mu, double sigma);
// P(k) for a unit bin under Logistic(loc, scale); >= 1e-9.
double LogisticBinLikelihood(double k, double loc, double scale);

// Standard normal CDF and its log, accurate deep into the lower tail.
double NormalCdf(double x);
double LogNormalCdf(double x);

// Sum of -log2 GaussianBinLikelihood over all elements. v, mu and sigma
// share one shape.
template <typename T>
nn::Var<T> GaussianRateBits(nn::Var<T> v, nn::Var<T> mu, nn::Var<T> sigma);

// Sum of -log2 LogisticBinLikelihood; v: [..., N], loc and log_scale: [N].
template <typename T>
nn::Var<T> LogisticRateBits(nn::Var<T> v, nn::Var<T> loc,
                            nn::Var<T> log_scale);

// -log2 of a clamped likelihood.
inline double BitsFromLikelihood(double p) {
  return -std::log2(p < kLikelihoodFloor ? kLikelihoodFloor : p);
}

}  // namespace ecat::entropy

#endif  // ECAT_ENTROPY_LIKELIHOOD_HPP_
