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

// Byte-oriented range coder with carry propagation (64-bit low, 32-bit
// range) over 16-bit cumulative frequency tables. Sub-intervals are
// floor(range * cdf / 2^16), so the tables cost no truncation loss.
//
// Stream layout: the implicit leading zero byte of the carry cache is not
// written, so a stream of n renormalization shifts is exactly 4 + n bytes,
// and the decoder consumes every byte. An empty symbol sequence encodes to
// an empty stream.

#ifndef ECAT_ENTROPY_RANGE_CODER_HPP_
#define ECAT_ENTROPY_RANGE_CODER_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ecat/entropy/tables.hpp"

namespace ecat::entropy {

class CodingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RangeEncoder {
 public:
  // Codes the interval [cum, cum + freq) of a 2^16 total.
  void Encode(std::uint32_t cum, std::uint32_t freq);
  std::vector<std::uint8_t> Finish();

 private:
  void ShiftLow();
  void Emit(std::uint8_t byte);

  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint8_t cache_ = 0;
  std::uint64_t cache_size_ = 1;
  bool leading_skipped_ = false;
  bool any_symbol_ = false;
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const std::uint8_t> bytes);

  // Target frequency in [0, 2^16) of the next symbol.
  std::uint32_t Target();
  // Removes the interval located for the current target.
  void Consume(std::uint32_t cum, std::uint32_t freq);

  std::size_t consumed() const { return pos_; }
  bool exhausted() const { return pos_ == bytes_.size(); }

 private:
  std::uint8_t Next();

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint32_t code_ = 0;
  bool started_ = false;
};

// Codes symbols[i] with tables.tables[contexts[i]].
std::vector<std::uint8_t> RangeEncode(std::span<const std::int32_t> symbols,
                                      std::span<const std::uint32_t> contexts,
                                      const EntropyTables& tables);

// Single-table convenience form.
std::vector<std::uint8_t> RangeEncode(std::span<const std::int32_t> symbols,
                                      const CdfTable& table);

// Decodes contexts.size() symbols. Throws CodingError if the stream is
// truncated or not consumed exactly (wrong count or mismatched tables).
std::vector<std::int32_t> RangeDecode(std::span<const std::uint8_t> bytes,
                                      std::span<const std::uint32_t> contexts,
                                      const EntropyTables& tables);

std::vector<std::int32_t> RangeDecode(std::span<const std::uint8_t> bytes,
                                      const CdfTable& table,
                                      std::size_t count);

}  // namespace ecat::entropy

#endif  // ECAT_ENTROPY_RANGE_CODER_HPP_
