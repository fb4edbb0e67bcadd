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

#include "ecat/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ecat/nn/rng.hpp"

namespace ecat::nn {

double GradCheckReport::max_rel_error() const {
  double m = 0.0;
  for (const auto& in : inputs) m = std::max(m, in.max_rel_error);
  return m;
}

std::string GradCheckReport::Summary() const {
  std::ostringstream os;
  os << (passed ? "pass" : "FAIL") << " tol=" << tolerance << " max_rel=[";
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (i) os << ", ";
    os << inputs[i].max_rel_error << " (" << inputs[i].checked << ")";
  }
  os << ']';
  return os.str();
}

double RelativeError(double analytic, double numeric, double floor) {
  const double denom =
      std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

namespace {

double Evaluate(const ScalarFn& f, const std::vector<Tensor<double>>& inputs) {
  Tape<double> tape(false);
  std::vector<Var<double>> vars;
  vars.reserve(inputs.size());
  for (const auto& t : inputs) vars.push_back(tape.Constant(t));
  return f(tape, vars).value().item();
}

}  // namespace

std::vector<Tensor<double>> AnalyticGradients(
    const ScalarFn& f, const std::vector<Tensor<double>>& inputs) {
  Tape<double> tape;
  std::vector<Var<double>> vars;
  vars.reserve(inputs.size());
  for (const auto& t : inputs) vars.push_back(tape.Leaf(t));
  tape.Backward(f(tape, vars));
  std::vector<Tensor<double>> grads;
  grads.reserve(inputs.size());
  for (const auto& v : vars) grads.push_back(tape.Grad(v));
  return grads;
}

double NumericPartial(const ScalarFn& f, std::vector<Tensor<double>> inputs,
                      std::size_t input, std::size_t index, double step) {
  double& x = inputs.at(input)[index];
  const double orig = x;
  x = orig + step;
  const double fp = Evaluate(f, inputs);
  x = orig - step;
  const double fm = Evaluate(f, inputs);
  return (fp - fm) / (2.0 * step);
}

GradCheckReport CompareGradients(const ScalarFn& f,
                                 const std::vector<Tensor<double>>& inputs,
                                 const std::vector<Tensor<double>>& analytic,
                                 double tolerance,
                                 const GradCheckOptions& options) {
  GradCheckReport report;
  report.tolerance = tolerance;
  Rng rng(options.seed);
  std::vector<Tensor<double>> work = inputs;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    InputCheck check;
    std::vector<std::size_t> idx(inputs[i].size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (options.max_samples && idx.size() > options.max_samples) {
      for (std::size_t k = 0; k < options.max_samples; ++k) {
        std::swap(idx[k], idx[k + rng.Below(idx.size() - k)]);
      }
      idx.resize(options.max_samples);
    }
    for (std::size_t j : idx) {
      if (options.skip && options.skip(i, j, inputs[i][j])) {
        ++check.skipped;
        continue;
      }
      double& x = work[i][j];
      const double orig = x;
      x = orig + options.step;
      const double fp = Evaluate(f, work);
      x = orig - options.step;
      const double fm = Evaluate(f, work);
      x = orig;
      const double numeric = (fp - fm) / (2.0 * options.step);
      check.max_rel_error =
          std::max(check.max_rel_error,
                   RelativeError(analytic[i][j], numeric, options.floor));
      ++check.checked;
    }
    report.inputs.push_back(check);
  }
  report.passed = report.max_rel_error() <= tolerance;
  return report;
}

GradCheckReport GradientCheck(const ScalarFn& f,
                              const std::vector<Tensor<double>>& inputs,
                              double tolerance,
                              const GradCheckOptions& options) {
  return CompareGradients(f, inputs, AnalyticGradients(f, inputs), tolerance,
                          options);
}

GradCheckReport ParameterGradientCheck(const ParamLossFn& f,
                                       std::span<Parameter<double>* const> params,
                                       double tolerance,
                                       const GradCheckOptions& options) {
  for (auto* p : params) p->ZeroGrad();
  {
    Tape<double> tape;
    tape.Backward(f(tape));
  }
  auto eval = [&] {
    Tape<double> tape(false);
    return f(tape).value().item();
  };
  GradCheckReport report;
  report.tolerance = tolerance;
  Rng rng(options.seed);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter<double>& p = *params[i];
    InputCheck check;
    std::vector<std::size_t> idx(p.value.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (options.max_samples && idx.size() > options.max_samples) {
      for (std::size_t k = 0; k < options.max_samples; ++k) {
        std::swap(idx[k], idx[k + rng.Below(idx.size() - k)]);
      }
      idx.resize(options.max_samples);
    }
    for (std::size_t j : idx) {
      if (options.skip && options.skip(i, j, p.value[j])) {
        ++check.skipped;
        continue;
      }
      double& x = p.value[j];
      const double orig = x;
      double step = options.step;
      double err = 0.0;
      for (int r = 0;; ++r) {
        x = orig + step;
        const double fp = eval();
        x = orig - step;
        const double fm = eval();
        x = orig;
        err = RelativeError(p.grad[j], (fp - fm) / (2.0 * step), options.floor);
        if (err <= tolerance || r == options.refinements) break;
        step *= 0.1;
        ++check.refined;
      }
      check.max_rel_error = std::max(check.max_rel_error, err);
      ++check.checked;
    }
    report.inputs.push_back(check);
  }
  report.passed = report.max_rel_error() <= tolerance;
  return report;
}

}  // namespace ecat::nn
