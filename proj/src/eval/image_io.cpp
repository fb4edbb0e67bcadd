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

#include "ecat/eval/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "ecat/io_audit.hpp"
#include "ecat/train/checkpoint.hpp"

namespace ecat::eval {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> b) : b_(b) {}

  void SkipSpace() {
    while (pos_ < b_.size()) {
      if (b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else if (std::isspace(b_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long Number() {
    SkipSpace();
    long v = 0;
    std::size_t digits = 0;
    while (pos_ < b_.size() && std::isdigit(b_[pos_])) {
      v = v * 10 + (b_[pos_++] - '0');
      if (v > 1000000) throw FormatError("PPM header value too large");
      ++digits;
    }
    if (digits == 0) throw FormatError("malformed PPM header");
    return v;
  }

  std::size_t pos() const { return pos_; }
  void Advance() { ++pos_; }
  std::uint8_t Peek() const { return b_[pos_]; }
  bool AtEnd() const { return pos_ >= b_.size(); }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

}  // namespace

Image DecodePpm(std::span<const std::uint8_t> bytes) {
  AuditImageDecode();
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw FormatError("not a binary P6 PPM");
  }
  HeaderReader r(bytes.subspan(2));
  const long w = r.Number();
  const long h = r.Number();
  const long maxval = r.Number();
  if (w <= 0 || h <= 0) throw FormatError("PPM has zero extent");
  if (maxval != 255) {
    throw FormatError("PPM maxval " + std::to_string(maxval) +
                      " unsupported (need 255)");
  }
  if (r.AtEnd() || !std::isspace(r.Peek())) {
    throw FormatError("malformed PPM header");
  }
  r.Advance();
  const std::size_t offset = 2 + r.pos();
  const std::size_t n = static_cast<std::size_t>(w * h * 3);
  if (bytes.size() < offset + n) throw FormatError("truncated PPM data");
  Image img;
  img.height = static_cast<int>(h);
  img.width = static_cast<int>(w);
  img.rgb.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                 bytes.begin() + static_cast<std::ptrdiff_t>(offset + n));
  return img;
}

std::vector<std::uint8_t> EncodePpm(const Image& img) {
  if (img.rgb.size() != static_cast<std::size_t>(img.height) * img.width * 3) {
    throw std::invalid_argument("image buffer does not match extent");
  }
  const std::string header = "P6\n" + std::to_string(img.width) + " " +
                             std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.rgb.begin(), img.rgb.end());
  return out;
}

Image ReadPpm(const std::string& path) {
  return DecodePpm(train::ReadFileBytes(path));
}

void WritePpm(const std::string& path, const Image& img) {
  train::WriteFileBytes(path, EncodePpm(img));
}

nn::Tensor<float> ToUnitTensor(const Image& img) {
  nn::Tensor<float> t(nn::Shape{img.height, img.width, 3});
  for (std::size_t i = 0; i < img.rgb.size(); ++i) {
    t[i] = static_cast<float>(img.rgb[i]) / 255.0f;
  }
  return t;
}

Image FromUnitTensor(const nn::Tensor<float>& x) {
  if (x.rank() != 3 || x.dim(2) != 3) {
    throw nn::ShapeError("expected [H,W,3], got " + nn::ShapeToString(x.shape()));
  }
  Image img;
  img.height = static_cast<int>(x.dim(0));
  img.width = static_cast<int>(x.dim(1));
  img.rgb.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const float v = std::clamp(x[i], 0.0f, 1.0f) * 255.0f;
    img.rgb[i] = static_cast<std::uint8_t>(std::lround(v));
  }
  return img;
}

}  // namespace ecat::eval
