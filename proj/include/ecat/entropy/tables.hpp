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

#ifndef ECAT_ENTROPY_TABLES_HPP_
#define ECAT_ENTROPY_TABLES_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ecat::entropy {

inline constexpr int kPrecisionBits = 16;
inline constexpr std::uint32_t kTotalFrequency = 1u << kPrecisionBits;

// Quantized CDF over the alphabet [min_symbol, min_symbol + size()).
// cdf.front() == 0, cdf.back() == 2^16, strictly increasing.
struct CdfTable {
  std::int32_t min_symbol = 0;
  std::vector<std::uint32_t> cdf;

  std::size_t size() const { return cdf.empty() ? 0 : cdf.size() - 1; }
  std::int32_t max_symbol() const {
    return min_symbol + static_cast<std::int32_t>(size()) - 1;
  }
  bool Contains(std::int32_t s) const {
    return s >= min_symbol && s <= max_symbol();
  }
  std::uint32_t Frequency(std::int32_t s) const {
    const auto i = static_cast<std::size_t>(s - min_symbol);
    return cdf[i + 1] - cdf[i];
  }
  // Symbol whose interval contains `target` (< 2^16).
  std::int32_t Lookup(std::uint32_t target) const;
};

struct EntropyTables {
  std::vector<CdfTable> tables;
};

// Quantizes a probability vector to 16-bit frequencies: every symbol gets
// at least 1, the rest is allotted by floor(p * (2^16 - A)) and the
// remainder goes to the most probable symbol. Throws std::invalid_argument
// for an empty or oversized alphabet.
CdfTable QuantizeDistribution(std::span<const double> probs,
                              std::int32_t min_symbol);

// One table per element for N(mu[i], sigma[i]) over [lo, hi]; tail mass
// beyond the end bins is folded into them.
EntropyTables BuildGaussianTables(std::span<const double> mu,
                                  std::span<const double> sigma,
                                  std::int32_t lo, std::int32_t hi);

// One table per channel for Logistic(loc[c], exp(log_scale[c])) over
// [lo, hi], with folded tails.
EntropyTables BuildLogisticTables(std::span<const double> loc,
                                  std::span<const double> log_scale,
                                  std::int32_t lo, std::int32_t hi);

// Ideal code length, in bits, of `symbols` under the quantized tables.
double IdealCodeLength(std::span<const std::int32_t> symbols,
                       std::span<const std::uint32_t> contexts,
                       const EntropyTables& tables);

}  // namespace ecat::entropy

#endif  // ECAT_ENTROPY_TABLES_HPP_
