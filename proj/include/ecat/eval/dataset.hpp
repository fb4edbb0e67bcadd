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

#ifndef ECAT_EVAL_DATASET_HPP_
#define ECAT_EVAL_DATASET_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ecat/eval/image_io.hpp"
#include "ecat/nn/rng.hpp"

namespace ecat::eval {

// Labelled 8-bit RGB images of one size, in manifest order.
class Dataset {
 public:
  Dataset() = default;
  Dataset(int height, int width) : height_(height), width_(width) {}

  // Throws std::invalid_argument if the size differs or label < 0.
  void Add(const Image& img, int label, std::string path = {});

  std::size_t size() const { return labels_.size(); }
  int height() const { return height_; }
  int width() const { return width_; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<std::string>& paths() const { return paths_; }

  Image image(std::size_t i) const;
  // [B,H,W,3] in [0,1] for the given indices.
  nn::Tensor<float> Batch(std::span<const std::size_t> indices) const;
  std::vector<int> BatchLabels(std::span<const std::size_t> indices) const;
  // First n images (or all).
  Dataset Head(std::size_t n) const;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> pixels_;
  std::vector<int> labels_;
  std::vector<std::string> paths_;
};

// Reads a "path,label" CSV (optional header row "path,label"; paths are
// relative to the manifest's directory) and the P6 images it lists.
// Throws FormatError on malformed rows or images, std::out_of_range for a
// label outside [0, num_classes), std::invalid_argument for a size
// mismatch, std::ios_base::failure on I/O errors.
Dataset Ingest(const std::string& manifest_path, int num_classes, int height,
               int width);

struct ChannelStats {
  std::array<double, 3> mean{};
  std::array<double, 3> stddev{};
};

// Per-channel mean and standard deviation of [0,1] pixels.
ChannelStats ComputeChannelStats(const Dataset& ds);

inline constexpr int kSyntheticClasses = 10;

// Deterministic shape image: class = shape identity, random colour,
// position and size on a smooth textured background.
Image SynthesizeImage(int label, int height, int width, nn::Rng& rng);

// n images, labels cycling 0..9, all derived from `seed`.
Dataset SynthesizeDataset(std::size_t n, int height, int width,
                          std::uint64_t seed);

// Writes images as <dir>/<split>/NNNNN.ppm plus <dir>/<split>/manifest.csv.
// Returns the manifest path.
std::string WriteDataset(const Dataset& ds, const std::string& dir,
                         const std::string& split);

}  // namespace ecat::eval

#endif  // ECAT_EVAL_DATASET_HPP_
