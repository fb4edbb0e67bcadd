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

#include "ecat/eval/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace ecat::eval {

namespace fs = std::filesystem;

void Dataset::Add(const Image& img, int label, std::string path) {
  if (img.height != height_ || img.width != width_) {
    throw std::invalid_argument(
        "image " + (path.empty() ? std::string("<memory>") : path) + " is " +
        std::to_string(img.height) + "x" + std::to_string(img.width) +
        ", expected " + std::to_string(height_) + "x" + std::to_string(width_));
  }
  if (label < 0) throw std::out_of_range("negative label");
  pixels_.insert(pixels_.end(), img.rgb.begin(), img.rgb.end());
  labels_.push_back(label);
  paths_.push_back(std::move(path));
}

Image Dataset::image(std::size_t i) const {
  const std::size_t n = static_cast<std::size_t>(height_) * width_ * 3;
  Image img;
  img.height = height_;
  img.width = width_;
  const auto begin = pixels_.begin() + static_cast<std::ptrdiff_t>(i * n);
  img.rgb.assign(begin, begin + static_cast<std::ptrdiff_t>(n));
  return img;
}

nn::Tensor<float> Dataset::Batch(std::span<const std::size_t> indices) const {
  const std::size_t n = static_cast<std::size_t>(height_) * width_ * 3;
  nn::Tensor<float> out(nn::Shape{static_cast<std::int64_t>(indices.size()),
                                  height_, width_, 3});
  float* dst = out.data();
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const std::uint8_t* src = pixels_.data() + indices[b] * n;
    for (std::size_t k = 0; k < n; ++k) *dst++ = src[k] / 255.0f;
  }
  return out;
}

std::vector<int> Dataset::BatchLabels(
    std::span<const std::size_t> indices) const {
  std::vector<int> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(labels_.at(i));
  return out;
}

Dataset Dataset::Head(std::size_t n) const {
  Dataset d(height_, width_);
  for (std::size_t i = 0; i < std::min(n, size()); ++i) {
    d.Add(image(i), labels_[i], paths_[i]);
  }
  return d;
}

Dataset Ingest(const std::string& manifest_path, int num_classes, int height,
               int width) {
  std::ifstream in(manifest_path);
  if (!in) throw std::ios_base::failure("cannot open " + manifest_path);
  const fs::path base = fs::path(manifest_path).parent_path();
  Dataset ds(height, width);
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (row == 1 && line == "path,label") continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos || comma == 0) {
      throw FormatError("manifest row " + std::to_string(row) +
                        ": expected path,label");
    }
    const std::string rel = line.substr(0, comma);
    const std::string lab = line.substr(comma + 1);
    int label = 0;
    const auto [ptr, ec] =
        std::from_chars(lab.data(), lab.data() + lab.size(), label);
    if (ec != std::errc() || ptr != lab.data() + lab.size()) {
      throw FormatError("manifest row " + std::to_string(row) +
                        ": bad label '" + lab + "'");
    }
    if (label < 0 || label >= num_classes) {
      throw std::out_of_range("manifest row " + std::to_string(row) +
                              ": label " + std::to_string(label) +
                              " outside [0, " + std::to_string(num_classes) +
                              ")");
    }
    const fs::path p = fs::path(rel).is_absolute() ? fs::path(rel) : base / rel;
    Image img;
    try {
      img = ReadPpm(p.string());
    } catch (const FormatError& e) {
      throw FormatError(p.string() + ": " + e.what());
    }
    ds.Add(img, label, rel);
  }
  return ds;
}

ChannelStats ComputeChannelStats(const Dataset& ds) {
  if (ds.size() == 0) throw std::invalid_argument("empty dataset");
  std::array<double, 3> sum{}, sq{};
  std::size_t count = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Image img = ds.image(i);
    for (std::size_t k = 0; k < img.rgb.size(); k += 3) {
      for (std::size_t c = 0; c < 3; ++c) {
        const double v = img.rgb[k + c] / 255.0;
        sum[c] += v;
        sq[c] += v * v;
      }
      ++count;
    }
  }
  ChannelStats s;
  for (std::size_t c = 0; c < 3; ++c) {
    s.mean[c] = sum[c] / count;
    const double var = std::max(sq[c] / count - s.mean[c] * s.mean[c], 0.0);
    s.stddev[c] = std::max(std::sqrt(var), 1e-3);
  }
  return s;
}

namespace {

// Signed distance-like value of each class's shape, in pixels; negative
// inside. (dx, dy) is relative to the shape centre, y pointing down.
double ShapeDistance(int label, double dx, double dy, double r) {
  const double ax = std::abs(dx), ay = std::abs(dy);
  auto plus = [r](double u, double v) {
    const double au = std::abs(u), av = std::abs(v);
    return std::min(std::max(au - r, av - 0.3 * r),
                    std::max(au - 0.3 * r, av - r));
  };
  switch (label) {
    case 0:  // disk
      return std::hypot(dx, dy) - r;
    case 1:  // square
      return std::max(ax, ay) - 0.8 * r;
    case 2: {  // upward triangle
      const double s = 0.5 * r;
      return std::max({dy - s, 0.866 * dx - 0.5 * dy - s,
                       -0.866 * dx - 0.5 * dy - s});
    }
    case 3:  // ring
      return std::abs(std::hypot(dx, dy) - 0.75 * r) - 0.25 * r;
    case 4:  // plus
      return plus(dx, dy);
    case 5:  // diamond
      return (ax + ay) * std::numbers::sqrt2 / 2.0 - 0.7 * r;
    case 6:  // diagonal cross
      return plus((dx + dy) / std::numbers::sqrt2,
                  (dx - dy) / std::numbers::sqrt2);
    case 7:  // hollow square
      return std::abs(std::max(ax, ay) - 0.7 * r) - 0.18 * r;
    case 8:  // two horizontal bars
      return std::min(std::max(ax - r, std::abs(dy - 0.45 * r) - 0.18 * r),
                      std::max(ax - r, std::abs(dy + 0.45 * r) - 0.18 * r));
    case 9: {  // upper half-disk
      const double y = dy + 0.3 * r;
      return std::max(std::hypot(dx, y) - r, y);
    }
    default:
      throw std::out_of_range("synthetic label must be in [0, 10)");
  }
}

double Luma(const std::array<double, 3>& c) {
  return 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2];
}

}  // namespace

Image SynthesizeImage(int label, int height, int width, nn::Rng& rng) {
  const double extent = std::min(height, width);
  const double r = extent * rng.Uniform(0.16, 0.28);
  const double margin = r * 1.05;
  const double cx = rng.Uniform(margin, width - margin);
  const double cy = rng.Uniform(margin, height - margin);

  std::array<double, 3> base, fg;
  for (auto& v : base) v = rng.Uniform(0.15, 0.85);
  for (auto& v : fg) v = rng.Uniform(0.0, 1.0);
  if (std::abs(Luma(fg) - Luma(base)) < 0.25) {
    for (auto& v : fg) v = Luma(base) > 0.5 ? v * 0.3 : 0.7 + 0.3 * v;
  }

  struct Wave {
    double fx, fy, phase;
    std::array<double, 3> amp;
  };
  std::array<Wave, 3> waves;
  for (auto& w : waves) {
    w.fx = rng.Uniform(-2.5, 2.5) / width;
    w.fy = rng.Uniform(-2.5, 2.5) / height;
    w.phase = rng.Uniform(0.0, 2.0 * std::numbers::pi);
    for (auto& a : w.amp) a = rng.Uniform(0.0, 0.08);
  }

  Image img;
  img.height = height;
  img.width = width;
  img.rgb.resize(static_cast<std::size_t>(height) * width * 3);
  std::size_t k = 0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double px = x + 0.5, py = y + 0.5;
      const double d = ShapeDistance(label, px - cx, py - cy, r);
      const double a = std::clamp(0.5 - d, 0.0, 1.0);
      for (std::size_t c = 0; c < 3; ++c) {
        double bg = base[c];
        for (const auto& w : waves) {
          bg += w.amp[c] * std::sin(2.0 * std::numbers::pi *
                                        (w.fx * px + w.fy * py) +
                                    w.phase);
        }
        const double v = std::clamp(a * fg[c] + (1.0 - a) * bg, 0.0, 1.0);
        img.rgb[k++] = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
    }
  }
  return img;
}

Dataset SynthesizeDataset(std::size_t n, int height, int width,
                          std::uint64_t seed) {
  Dataset ds(height, width);
  for (std::size_t i = 0; i < n; ++i) {
    nn::Rng rng(nn::DeriveSeed(seed, {i}));
    const int label = static_cast<int>(i % kSyntheticClasses);
    ds.Add(SynthesizeImage(label, height, width, rng), label);
  }
  return ds;
}

std::string WriteDataset(const Dataset& ds, const std::string& dir,
                         const std::string& split) {
  const fs::path root = fs::path(dir) / split;
  fs::create_directories(root);
  std::ostringstream manifest;
  manifest << "path,label\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "%05zu.ppm", i);
    WritePpm((root / name).string(), ds.image(i));
    manifest << name << ',' << ds.labels()[i] << '\n';
  }
  const fs::path mpath = root / "manifest.csv";
  std::ofstream out(mpath, std::ios::trunc);
  if (!out) throw std::ios_base::failure("cannot write " + mpath.string());
  out << manifest.str();
  return mpath.string();
}

}  // namespace ecat::eval
