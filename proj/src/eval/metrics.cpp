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

#include "ecat/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "ecat/model/codec.hpp"

namespace ecat::eval {

namespace {

Image Slice(const nn::Tensor<float>& batch, std::int64_t b) {
  const nn::Shape s(batch.shape().begin() + 1, batch.shape().end());
  const auto n = static_cast<std::size_t>(nn::NumElements(s));
  const float* p = batch.data() + static_cast<std::size_t>(b) * n;
  return FromUnitTensor(nn::Tensor<float>(s, std::vector<float>(p, p + n)));
}

std::size_t ArgMax(const float* p, std::size_t n) {
  return static_cast<std::size_t>(std::max_element(p, p + n) - p);
}

template <typename F>
void ForEachBatch(std::size_t n, std::size_t bs, F&& f) {
  std::vector<std::size_t> idx;
  for (std::size_t begin = 0; begin < n; begin += bs) {
    idx.resize(std::min(bs, n - begin));
    std::iota(idx.begin(), idx.end(), begin);
    f(std::span<const std::size_t>(idx));
  }
}

}  // namespace

double MeanSquaredError8(const Image& a, const Image& b) {
  if (a.height != b.height || a.width != b.width ||
      a.rgb.size() != b.rgb.size()) {
    throw std::invalid_argument("PSNR needs images of equal size");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.rgb.size(); ++i) {
    const double d = static_cast<double>(a.rgb[i]) - b.rgb[i];
    sum += d * d;
  }
  return sum / static_cast<double>(a.rgb.size());
}

double Psnr(const Image& a, const Image& b) {
  const double mse = MeanSquaredError8(a, b);
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / mse));
}

MetricRecord Evaluate(Model<float>& model, const Dataset& data,
                      const EvalOptions& opts) {
  if (data.size() == 0) throw std::invalid_argument("empty evaluation set");
  const int k = model.config().num_classes;
  MetricRecord rec;
  double psnr_sum = 0.0;
  std::size_t correct = 0;
  ForEachBatch(data.size(), opts.batch_size, [&](std::span<const std::size_t> idx) {
    const nn::Tensor<float> x = data.Batch(idx);
    const std::vector<entropy::LatentPack> sent = EncodeImages(model, x);
    std::vector<entropy::LatentPack> received;
    received.reserve(sent.size());
    for (const auto& pack : sent) {
      const std::vector<std::uint8_t> bytes =
          entropy::Serialize(pack, model.hyper(), model.config());
      rec.total_bytes += bytes.size();
      received.push_back(ReadStream(model, bytes));
    }
    const nn::Tensor<float> probs = ClassifyPacks(model, received);
    const nn::Tensor<float> recon = ReconstructPacks(model, received, opts.mask);
    for (std::size_t b = 0; b < idx.size(); ++b) {
      const std::size_t pred = ArgMax(probs.data() + b * k, static_cast<std::size_t>(k));
      if (static_cast<int>(pred) == data.labels()[idx[b]]) ++correct;
      psnr_sum += Psnr(data.image(idx[b]), Slice(recon, static_cast<std::int64_t>(b)));
    }
  });
  rec.images = data.size();
  const double pixels = static_cast<double>(data.height()) * data.width() *
                        static_cast<double>(data.size());
  rec.bpp = 8.0 * static_cast<double>(rec.total_bytes) / pixels;
  rec.psnr = psnr_sum / static_cast<double>(data.size());
  rec.top1 = static_cast<double>(correct) / static_cast<double>(data.size());
  return rec;
}

std::array<double, 4> AblationLadder(Model<float>& model, const Dataset& data,
                                     std::size_t batch_size) {
  std::array<double, 4> sums{};
  ForEachBatch(data.size(), batch_size, [&](std::span<const std::size_t> idx) {
    const std::vector<entropy::LatentPack> packs =
        EncodeImages(model, data.Batch(idx));
    for (int keep = 0; keep <= 3; ++keep) {
      const nn::Tensor<float> recon =
          ReconstructPacks(model, packs, FeatureMask::FirstN(keep));
      for (std::size_t b = 0; b < idx.size(); ++b) {
        sums[static_cast<std::size_t>(keep)] +=
            Psnr(data.image(idx[b]), Slice(recon, static_cast<std::int64_t>(b)));
      }
    }
  });
  for (double& s : sums) s /= static_cast<double>(data.size());
  return sums;
}

std::string CurvesCsv(std::span<const MetricRecord> records) {
  std::vector<MetricRecord> sorted(records.begin(), records.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const MetricRecord& a, const MetricRecord& b) {
                     return a.bpp < b.bpp;
                   });
  std::string out = "bpp,psnr,top1,alpha,beta,seed\n";
  char line[160];
  for (const auto& r : sorted) {
    std::snprintf(line, sizeof(line), "%.6f,%.4f,%.4f,%.6g,%.6g,%llu\n", r.bpp,
                  r.psnr, r.top1, r.alpha, r.beta,
                  static_cast<unsigned long long>(r.seed));
    out += line;
  }
  return out;
}

void EmitCurves(std::span<const MetricRecord> records, const std::string& dir) {
  if (records.empty()) throw std::invalid_argument("no records to emit");
  std::filesystem::create_directories(dir);
  const std::string csv = CurvesCsv(records);
  for (const char* name : {"rate_distortion.csv", "rate_accuracy.csv"}) {
    const std::string path = (std::filesystem::path(dir) / name).string();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::ios_base::failure("cannot write " + path);
    out << csv;
  }
}

}  // namespace ecat::eval
