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

#include "ecat/entropy/tables.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ecat/entropy/likelihood.hpp"

namespace ecat::entropy {

namespace {

double LogSigmoid(double x) {
  return x < 0.0 ? x - std::log1p(std::exp(x)) : -std::log1p(std::exp(-x));
}

void CheckBounds(std::int32_t lo, std::int32_t hi) {
  if (hi < lo) throw std::invalid_argument("empty alphabet");
  if (static_cast<std::int64_t>(hi) - lo + 1 > kTotalFrequency) {
    throw std::invalid_argument("alphabet larger than 2^16 symbols");
  }
}

// log_bin(k) for interior symbols; log_lower(x) = log F(x) and
// log_upper(x) = log (1 - F(x)) for the folded end bins.
template <typename Bin, typename Lower, typename Upper>
CdfTable BuildOne(std::int32_t lo, std::int32_t hi, Bin log_bin,
                  Lower log_lower, Upper log_upper,
                  std::vector<double>& scratch) {
  const std::size_t a = static_cast<std::size_t>(hi - lo + 1);
  scratch.resize(a);
  if (a == 1) {
    scratch[0] = 1.0;
  } else {
    scratch[0] = std::exp(log_lower(lo + 0.5));
    scratch[a - 1] = std::exp(log_upper(hi - 0.5));
    for (std::size_t i = 1; i + 1 < a; ++i) {
      scratch[i] = std::exp(log_bin(lo + static_cast<std::int32_t>(i)));
    }
  }
  return QuantizeDistribution(scratch, lo);
}

}  // namespace

std::int32_t CdfTable::Lookup(std::uint32_t target) const {
  const auto it = std::upper_bound(cdf.begin() + 1, cdf.end(), target);
  return min_symbol + static_cast<std::int32_t>(it - cdf.begin() - 1);
}

CdfTable QuantizeDistribution(std::span<const double> probs,
                              std::int32_t min_symbol) {
  const std::size_t a = probs.size();
  if (a == 0) throw std::invalid_argument("empty alphabet");
  if (a > kTotalFrequency) {
    throw std::invalid_argument("alphabet of " + std::to_string(a) +
                                " symbols exceeds 2^16");
  }
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("invalid probability");
    }
    total += p;
  }
  // Nearest count with a floor of one; the surplus or deficit is settled on
  // the largest bins.
  const double scale = static_cast<double>(kTotalFrequency);
  std::vector<std::uint32_t> freq(a, 1);
  std::int64_t used = 0;
  for (std::size_t i = 0; i < a; ++i) {
    const double p = total > 0.0 ? probs[i] / total : 1.0 / static_cast<double>(a);
    freq[i] = static_cast<std::uint32_t>(
        std::clamp(std::llround(p * scale), 1LL, static_cast<long long>(kTotalFrequency)));
    used += freq[i];
  }
  std::int64_t diff = static_cast<std::int64_t>(kTotalFrequency) - used;
  while (diff != 0) {
    const auto big = static_cast<std::size_t>(
        std::max_element(freq.begin(), freq.end()) - freq.begin());
    if (diff > 0) {
      freq[big] += static_cast<std::uint32_t>(diff);
      diff = 0;
    } else {
      const std::int64_t take = std::min<std::int64_t>(-diff, freq[big] - 1);
      if (take == 0) throw std::logic_error("frequency underflow");
      freq[big] -= static_cast<std::uint32_t>(take);
      diff += take;
    }
  }

  CdfTable t;
  t.min_symbol = min_symbol;
  t.cdf.resize(a + 1);
  t.cdf[0] = 0;
  for (std::size_t i = 0; i < a; ++i) t.cdf[i + 1] = t.cdf[i] + freq[i];
  return t;
}

EntropyTables BuildGaussianTables(std::span<const double> mu,
                                  std::span<const double> sigma,
                                  std::int32_t lo, std::int32_t hi) {
  CheckBounds(lo, hi);
  if (mu.size() != sigma.size()) {
    throw std::invalid_argument("mu/sigma length mismatch");
  }
  EntropyTables out;
  out.tables.reserve(mu.size());
  std::vector<double> scratch;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double m = mu[i], s = sigma[i];
    if (!(s > 0.0)) throw std::invalid_argument("sigma must be positive");
    out.tables.push_back(BuildOne(
        lo, hi, [&](std::int32_t k) { return GaussianLogBin(k - m, s).log_p; },
        [&](double x) { return LogNormalCdf((x - m) / s); },
        [&](double x) { return LogNormalCdf((m - x) / s); }, scratch));
  }
  return out;
}

EntropyTables BuildLogisticTables(std::span<const double> loc,
                                  std::span<const double> log_scale,
                                  std::int32_t lo, std::int32_t hi) {
  CheckBounds(lo, hi);
  if (loc.size() != log_scale.size()) {
    throw std::invalid_argument("loc/log_scale length mismatch");
  }
  EntropyTables out;
  out.tables.reserve(loc.size());
  std::vector<double> scratch;
  for (std::size_t c = 0; c < loc.size(); ++c) {
    const double m = loc[c], ls = log_scale[c], s = std::exp(ls);
    out.tables.push_back(BuildOne(
        lo, hi, [&](std::int32_t k) { return LogisticLogBin(k - m, ls).log_p; },
        [&](double x) { return LogSigmoid((x - m) / s); },
        [&](double x) { return LogSigmoid((m - x) / s); }, scratch));
  }
  return out;
}

double IdealCodeLength(std::span<const std::int32_t> symbols,
                       std::span<const std::uint32_t> contexts,
                       const EntropyTables& tables) {
  if (symbols.size() != contexts.size()) {
    throw std::invalid_argument("symbol/context length mismatch");
  }
  double bits = 0.0;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const CdfTable& t = tables.tables.at(contexts[i]);
    if (!t.Contains(symbols[i])) {
      throw std::out_of_range("symbol outside alphabet");
    }
    bits -= std::log2(static_cast<double>(t.Frequency(symbols[i])) /
                      kTotalFrequency);
  }
  return bits;
}

}  // namespace ecat::entropy
