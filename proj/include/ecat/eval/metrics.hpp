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

#ifndef ECAT_EVAL_METRICS_HPP_
#define ECAT_EVAL_METRICS_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ecat/eval/dataset.hpp"
#include "ecat/model/model.hpp"

namespace ecat::eval {

inline constexpr double kPsnrCap = 100.0;

// Mean squared error over all 8-bit samples.
double MeanSquaredError8(const Image& a, const Image& b);

// 10 log10(255^2 / MSE), or kPsnrCap when the images are identical.
double Psnr(const Image& a, const Image& b);

struct MetricRecord {
  double bpp = 0.0;
  double psnr = 0.0;   // mean of per-image PSNR
  double top1 = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::string checkpoint;
  std::size_t images = 0;
  std::size_t total_bytes = 0;
};

struct EvalOptions {
  std::size_t batch_size = 50;
  FeatureMask mask = FeatureMask::All();
};

// Compresses every image to a stream, then classifies and reconstructs
// from the deserialized stream. bpp counts whole streams, header included.
MetricRecord Evaluate(Model<float>& model, const Dataset& data,
                      const EvalOptions& opts = {});

// Mean PSNR with the first k transformer intermediates kept, k = 0..3.
std::array<double, 4> AblationLadder(Model<float>& model, const Dataset& data,
                                     std::size_t batch_size = 50);

// Writes rate_distortion.csv and rate_accuracy.csv under `dir`, both sorted
// by ascending bpp with columns bpp,psnr,top1,alpha,beta,seed.
void EmitCurves(std::span<const MetricRecord> records, const std::string& dir);

// The CSV text EmitCurves writes.
std::string CurvesCsv(std::span<const MetricRecord> records);

}  // namespace ecat::eval

#endif  // ECAT_EVAL_METRICS_HPP_
