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

// Container for one coded image. All integers are little-endian.
//
//   offset  size  field
//   0       4     magic "ECAT"
//   4       1     version (1)
//   5       8     model config digest
//   13      2     image height
//   15      2     image width
//   17      2x4   zmin, zmax, hmin, hmax (signed)
//   25      4     hyper segment length in bytes
//   29      ...   hyper segment, then main segment to the end
//
// The hyper segment is coded with the per-channel factorized tables; the
// main segment with one Gaussian table per latent element, whose parameters
// the decoder recomputes from the decoded hyper-latent.

#ifndef ECAT_ENTROPY_BITSTREAM_HPP_
#define ECAT_ENTROPY_BITSTREAM_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ecat/entropy/hyperprior.hpp"
#include "ecat/entropy/tables.hpp"
#include "ecat/model/config.hpp"
#include "ecat/nn/tensor.hpp"

namespace ecat::entropy {

inline constexpr std::uint8_t kStreamVersion = 1;
inline constexpr std::size_t kHeaderBytes = 29;

class BitstreamError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Quantized latents of one image.
struct LatentPack {
  nn::Tensor<std::int32_t> z;  // [h, w, M]
  nn::Tensor<std::int32_t> h;  // [ceil(h/4), ceil(w/4), N]
  std::int32_t zmin = 0, zmax = 0, hmin = 0, hmax = 0;

  // Bounds set to the observed min/max of each tensor.
  static LatentPack FromSymbols(nn::Tensor<std::int32_t> z,
                                nn::Tensor<std::int32_t> h);

  // Throws std::invalid_argument on rank, bound or range violations.
  void Validate() const;

  friend bool operator==(const LatentPack&, const LatentPack&) = default;
};

struct StreamHeader {
  std::uint8_t version = kStreamVersion;
  std::uint64_t digest = 0;
  std::uint16_t height = 0;
  std::uint16_t width = 0;
  std::int16_t zmin = 0, zmax = 0, hmin = 0, hmax = 0;
  std::uint32_t hyper_bytes = 0;
};

// Parses and checks magic, version and segment length.
StreamHeader ParseHeader(std::span<const std::uint8_t> bytes);

// Gaussian parameters of every main-latent element, row-major [h, w, M].
struct ElementGaussians {
  std::vector<double> mu;
  std::vector<double> sigma;
};

ElementGaussians PredictGaussians(HyperPrior<float>& hyper,
                                  const nn::Tensor<std::int32_t>& h_symbols,
                                  int latent_h, int latent_w);

EntropyTables HyperTables(HyperPrior<float>& hyper, std::int32_t lo,
                          std::int32_t hi);

std::vector<std::uint8_t> Serialize(const LatentPack& pack,
                                    HyperPrior<float>& hyper,
                                    const ModelConfig& cfg);

LatentPack Deserialize(std::span<const std::uint8_t> bytes,
                       HyperPrior<float>& hyper, const ModelConfig& cfg);

// Estimated bits of the pack under the entropy models: clamped Gaussian
// bin likelihoods of z plus factorized likelihoods of h.
double RateEstimate(const LatentPack& pack, HyperPrior<float>& hyper);

// Total stream bits over image pixels.
double BitsPerPixel(std::size_t stream_bytes, int height, int width);

}  // namespace ecat::entropy

#endif  // ECAT_ENTROPY_BITSTREAM_HPP_
