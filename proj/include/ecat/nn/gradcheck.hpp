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

// Central finite-difference verification of tape gradients (64-bit only).

#ifndef ECAT_NN_GRADCHECK_HPP_
#define ECAT_NN_GRADCHECK_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ecat/nn/tape.hpp"

namespace ecat::nn {

// Builds a scalar from leaf inputs recorded on the given tape.
using ScalarFn =
    std::function<Var<double>(Tape<double>&, std::span<const Var<double>>)>;

// Returns true for (input, flat index, value) points that must not be
// sampled, e.g. kinks of piecewise-linear activations.
using SkipPredicate = std::function<bool(std::size_t, std::size_t, double)>;

struct GradCheckOptions {
  double step = 1e-5;
  // Denominator floor of the relative error; below it the error is absolute.
  double floor = 1e-3;
  // 0 checks every element; otherwise a seeded random subset per input.
  std::size_t max_samples = 0;
  std::uint64_t seed = 1;
  SkipPredicate skip;
  // ParameterGradientCheck only: an entry over tolerance is retried with the
  // step divided by 10, up to this many times. A kink of a piecewise-linear
  // activation inside the step spoils the difference; a wrong gradient does
  // not converge.
  int refinements = 0;
};

struct InputCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  std::size_t refined = 0;  // retries with a smaller step
};

struct GradCheckReport {
  std::vector<InputCheck> inputs;
  double tolerance = 0.0;
  bool passed = false;

  double max_rel_error() const;
  std::string Summary() const;
};

double RelativeError(double analytic, double numeric, double floor);

std::vector<Tensor<double>> AnalyticGradients(
    const ScalarFn& f, const std::vector<Tensor<double>>& inputs);

double NumericPartial(const ScalarFn& f, std::vector<Tensor<double>> inputs,
                      std::size_t input, std::size_t index, double step);

// Compares supplied analytic gradients against finite differences.
GradCheckReport CompareGradients(const ScalarFn& f,
                                 const std::vector<Tensor<double>>& inputs,
                                 const std::vector<Tensor<double>>& analytic,
                                 double tolerance,
                                 const GradCheckOptions& options = {});

GradCheckReport GradientCheck(const ScalarFn& f,
                              const std::vector<Tensor<double>>& inputs,
                              double tolerance,
                              const GradCheckOptions& options = {});

// Loss over parameters, read through tape.Param(). Must be deterministic
// (any noise drawn from a generator seeded inside the function).
using ParamLossFn = std::function<Var<double>(Tape<double>&)>;

// Checks Parameter::grad after Backward() against finite differences of the
// parameter values. Existing gradients are cleared.
GradCheckReport ParameterGradientCheck(const ParamLossFn& f,
                                       std::span<Parameter<double>* const> params,
                                       double tolerance,
                                       const GradCheckOptions& options = {});

}  // namespace ecat::nn

#endif  // ECAT_NN_GRADCHECK_HPP_
