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

#ifndef ECAT_EVAL_IMAGE_IO_HPP_
#define ECAT_EVAL_IMAGE_IO_HPP_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecat/nn/tensor.hpp"

namespace ecat::eval {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// 8-bit interleaved RGB.
struct Image {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> rgb;  // height * width * 3

  friend bool operator==(const Image&, const Image&) = default;
};

// Binary P6 with maxval 255 only; comments allowed in the header.
Image DecodePpm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> EncodePpm(const Image& img);

// Throws std::ios_base::failure on I/O errors, FormatError on bad content.
Image ReadPpm(const std::string& path);
void WritePpm(const std::string& path, const Image& img);

// [H,W,3] in [0,1].
nn::Tensor<float> ToUnitTensor(const Image& img);
// Clamps to [0,1], scales by 255 and rounds to nearest.
Image FromUnitTensor(const nn::Tensor<float>& x);

}  // namespace ecat::eval

#endif  // ECAT_EVAL_IMAGE_IO_HPP_
