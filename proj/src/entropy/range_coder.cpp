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

#include "ecat/entropy/range_coder.hpp"

#include <string>

namespace ecat::entropy {

namespace {

constexpr std::uint32_t kTop = 1u << 24;

void CheckInterval(std::uint32_t cum, std::uint32_t freq) {
  if (freq == 0 || cum + freq > kTotalFrequency) {
    throw CodingError("invalid coding interval");
  }
}

// floor(range * c / total), exact in 64 bits.
std::uint64_t Scaled(std::uint32_t range, std::uint32_t c) {
  return (static_cast<std::uint64_t>(range) * c) >> kPrecisionBits;
}

}  // namespace

void RangeEncoder::Emit(std::uint8_t byte) {
  // The first byte out of the cache is always zero; it is not stored.
  if (!leading_skipped_) {
    leading_skipped_ = true;
    return;
  }
  out_.push_back(byte);
}

void RangeEncoder::ShiftLow() {
  if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    const auto carry = static_cast<std::uint8_t>(low_ >> 32);
    std::uint8_t temp = cache_;
    do {
      Emit(static_cast<std::uint8_t>(temp + carry));
      temp = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<std::uint8_t>(static_cast<std::uint32_t>(low_) >> 24);
  }
  ++cache_size_;
  low_ = static_cast<std::uint64_t>(static_cast<std::uint32_t>(low_) << 8);
}

void RangeEncoder::Encode(std::uint32_t cum, std::uint32_t freq) {
  CheckInterval(cum, freq);
  any_symbol_ = true;
  const std::uint64_t lo = Scaled(range_, cum);
  low_ += lo;
  range_ = static_cast<std::uint32_t>(Scaled(range_, cum + freq) - lo);
  while (range_ < kTop) {
    range_ <<= 8;
    ShiftLow();
  }
}

std::vector<std::uint8_t> RangeEncoder::Finish() {
  if (any_symbol_) {
    for (int i = 0; i < 5; ++i) ShiftLow();
  }
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> bytes)
    : bytes_(bytes) {}

std::uint8_t RangeDecoder::Next() {
  if (pos_ >= bytes_.size()) throw CodingError("truncated range-coded stream");
  return bytes_[pos_++];
}

std::uint32_t RangeDecoder::Target() {
  if (!started_) {
    for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | Next();
    started_ = true;
  }
  // A valid stream keeps code < range; anything else is a corrupted or
  // mismatched stream.
  if (code_ >= range_) throw CodingError("corrupt range-coded stream");
  // Largest t with floor(range * t / total) <= code.
  return static_cast<std::uint32_t>(
      ((static_cast<std::uint64_t>(code_) + 1) * kTotalFrequency - 1) / range_);
}

void RangeDecoder::Consume(std::uint32_t cum, std::uint32_t freq) {
  CheckInterval(cum, freq);
  const std::uint64_t lo = Scaled(range_, cum);
  code_ -= static_cast<std::uint32_t>(lo);
  range_ = static_cast<std::uint32_t>(Scaled(range_, cum + freq) - lo);
  while (range_ < kTop) {
    code_ = (code_ << 8) | Next();
    range_ <<= 8;
  }
}

std::vector<std::uint8_t> RangeEncode(std::span<const std::int32_t> symbols,
                                      std::span<const std::uint32_t> contexts,
                                      const EntropyTables& tables) {
  if (symbols.size() != contexts.size()) {
    throw std::invalid_argument("symbol/context length mismatch");
  }
  RangeEncoder enc;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (contexts[i] >= tables.tables.size()) {
      throw std::out_of_range("context index out of range");
    }
    const CdfTable& t = tables.tables[contexts[i]];
    const std::int32_t s = symbols[i];
    if (!t.Contains(s)) {
      throw std::out_of_range("symbol " + std::to_string(s) +
                              " outside alphabet [" +
                              std::to_string(t.min_symbol) + ", " +
                              std::to_string(t.max_symbol()) + "]");
    }
    const auto k = static_cast<std::size_t>(s - t.min_symbol);
    enc.Encode(t.cdf[k], t.cdf[k + 1] - t.cdf[k]);
  }
  return enc.Finish();
}

std::vector<std::uint8_t> RangeEncode(std::span<const std::int32_t> symbols,
                                      const CdfTable& table) {
  EntropyTables one;
  one.tables.push_back(table);
  const std::vector<std::uint32_t> ctx(symbols.size(), 0);
  return RangeEncode(symbols, ctx, one);
}

std::vector<std::int32_t> RangeDecode(std::span<const std::uint8_t> bytes,
                                      std::span<const std::uint32_t> contexts,
                                      const EntropyTables& tables) {
  std::vector<std::int32_t> out;
  out.reserve(contexts.size());
  if (contexts.empty()) {
    if (!bytes.empty()) throw CodingError("wrong symbol count for stream");
    return out;
  }
  RangeDecoder dec(bytes);
  for (const std::uint32_t c : contexts) {
    if (c >= tables.tables.size()) {
      throw std::out_of_range("context index out of range");
    }
    const CdfTable& t = tables.tables[c];
    const std::int32_t s = t.Lookup(dec.Target());
    const auto k = static_cast<std::size_t>(s - t.min_symbol);
    dec.Consume(t.cdf[k], t.cdf[k + 1] - t.cdf[k]);
    out.push_back(s);
  }
  if (!dec.exhausted()) throw CodingError("wrong symbol count for stream");
  return out;
}

std::vector<std::int32_t> RangeDecode(std::span<const std::uint8_t> bytes,
                                      const CdfTable& table,
                                      std::size_t count) {
  EntropyTables one;
  one.tables.push_back(table);
  const std::vector<std::uint32_t> ctx(count, 0);
  return RangeDecode(bytes, ctx, one);
}

}  // namespace ecat::entropy
