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

#include "ecat/entropy/bitstream.hpp"

#include <algorithm>
#include <cstring>
#include <limits>
#include <string>

#include "ecat/entropy/likelihood.hpp"
#include "ecat/entropy/range_coder.hpp"

namespace ecat::entropy {

namespace {

constexpr char kMagic[4] = {'E', 'C', 'A', 'T'};

template <typename U>
void Put(std::vector<std::uint8_t>& out, U v) {
  using Raw = std::make_unsigned_t<U>;
  auto r = static_cast<Raw>(v);
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<std::uint8_t>(r >> (8 * i)));
  }
}

template <typename U>
U Get(std::span<const std::uint8_t> in, std::size_t& pos) {
  using Raw = std::make_unsigned_t<U>;
  Raw r = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    r |= static_cast<Raw>(static_cast<Raw>(in[pos + i]) << (8 * i));
  }
  pos += sizeof(U);
  return static_cast<U>(r);
}

std::pair<std::int32_t, std::int32_t> MinMax(
    const nn::Tensor<std::int32_t>& t) {
  if (t.empty()) throw std::invalid_argument("empty latent tensor");
  const auto [lo, hi] = std::minmax_element(t.values().begin(), t.values().end());
  return {*lo, *hi};
}

bool FitsI16(std::int32_t v) {
  return v >= std::numeric_limits<std::int16_t>::min() &&
         v <= std::numeric_limits<std::int16_t>::max();
}

std::vector<std::uint32_t> IotaContexts(std::size_t n) {
  std::vector<std::uint32_t> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = static_cast<std::uint32_t>(i);
  return c;
}

std::vector<std::uint32_t> ChannelContexts(std::size_t n, std::size_t ch) {
  std::vector<std::uint32_t> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = static_cast<std::uint32_t>(i % ch);
  return c;
}

std::vector<double> ToDouble(const nn::Tensor<float>& t) {
  return std::vector<double>(t.values().begin(), t.values().end());
}

}  // namespace

LatentPack LatentPack::FromSymbols(nn::Tensor<std::int32_t> z,
                                   nn::Tensor<std::int32_t> h) {
  LatentPack p;
  std::tie(p.zmin, p.zmax) = MinMax(z);
  std::tie(p.hmin, p.hmax) = MinMax(h);
  p.z = std::move(z);
  p.h = std::move(h);
  return p;
}

void LatentPack::Validate() const {
  if (z.rank() != 3 || h.rank() != 3) {
    throw std::invalid_argument("latent pack tensors must be rank 3");
  }
  if (h.dim(0) != (z.dim(0) + 3) / 4 || h.dim(1) != (z.dim(1) + 3) / 4) {
    throw std::invalid_argument("hyper-latent extent does not match latent");
  }
  for (std::int32_t b : {zmin, zmax, hmin, hmax}) {
    if (!FitsI16(b)) throw std::invalid_argument("alphabet bound exceeds int16");
  }
  if (zmin > zmax || hmin > hmax) {
    throw std::invalid_argument("empty alphabet bounds");
  }
  for (std::int32_t v : z.values()) {
    if (v < zmin || v > zmax) {
      throw std::invalid_argument("latent symbol outside declared bounds");
    }
  }
  for (std::int32_t v : h.values()) {
    if (v < hmin || v > hmax) {
      throw std::invalid_argument("hyper symbol outside declared bounds");
    }
  }
}

StreamHeader ParseHeader(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes) throw BitstreamError("truncated header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw BitstreamError("bad magic");
  }
  std::size_t pos = 4;
  StreamHeader hd;
  hd.version = Get<std::uint8_t>(bytes, pos);
  if (hd.version != kStreamVersion) {
    throw BitstreamError("unsupported version " + std::to_string(hd.version));
  }
  hd.digest = Get<std::uint64_t>(bytes, pos);
  hd.height = Get<std::uint16_t>(bytes, pos);
  hd.width = Get<std::uint16_t>(bytes, pos);
  hd.zmin = Get<std::int16_t>(bytes, pos);
  hd.zmax = Get<std::int16_t>(bytes, pos);
  hd.hmin = Get<std::int16_t>(bytes, pos);
  hd.hmax = Get<std::int16_t>(bytes, pos);
  hd.hyper_bytes = Get<std::uint32_t>(bytes, pos);
  if (bytes.size() - kHeaderBytes < hd.hyper_bytes) {
    throw BitstreamError("truncated hyper segment");
  }
  return hd;
}

ElementGaussians PredictGaussians(HyperPrior<float>& hyper,
                                  const nn::Tensor<std::int32_t>& h_symbols,
                                  int latent_h, int latent_w) {
  nn::Shape s{1};
  s.insert(s.end(), h_symbols.shape().begin(), h_symbols.shape().end());
  nn::Tensor<float> h(s);
  for (std::size_t i = 0; i < h.size(); ++i) {
    h[i] = static_cast<float>(h_symbols[i]);
  }
  nn::Tape<float> tape(false);
  const GaussianParams<float> g =
      hyper.Decode(tape, tape.Constant(std::move(h)), latent_h, latent_w);
  return ElementGaussians{ToDouble(g.mu.value()), ToDouble(g.sigma.value())};
}

EntropyTables HyperTables(HyperPrior<float>& hyper, std::int32_t lo,
                          std::int32_t hi) {
  return BuildLogisticTables(ToDouble(hyper.prior().loc().value),
                             ToDouble(hyper.prior().log_scale().value), lo, hi);
}

std::vector<std::uint8_t> Serialize(const LatentPack& pack,
                                    HyperPrior<float>& hyper,
                                    const ModelConfig& cfg) {
  pack.Validate();
  const int lh = static_cast<int>(pack.z.dim(0));
  const int lw = static_cast<int>(pack.z.dim(1));
  if (lh != cfg.latent_h() || lw != cfg.latent_w() ||
      pack.z.dim(2) != cfg.channels_m || pack.h.dim(2) != cfg.channels_n) {
    throw std::invalid_argument("latent pack does not match model config");
  }

  const EntropyTables ht = HyperTables(hyper, pack.hmin, pack.hmax);
  const std::vector<std::uint8_t> hyper_seg = RangeEncode(
      pack.h.values(), ChannelContexts(pack.h.size(), cfg.channels_n), ht);

  const ElementGaussians g = PredictGaussians(hyper, pack.h, lh, lw);
  const EntropyTables mt =
      BuildGaussianTables(g.mu, g.sigma, pack.zmin, pack.zmax);
  const std::vector<std::uint8_t> main_seg =
      RangeEncode(pack.z.values(), IotaContexts(pack.z.size()), mt);

  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + hyper_seg.size() + main_seg.size());
  out.insert(out.end(), kMagic, kMagic + 4);
  Put<std::uint8_t>(out, kStreamVersion);
  Put<std::uint64_t>(out, cfg.Digest());
  Put<std::uint16_t>(out, static_cast<std::uint16_t>(cfg.input_h));
  Put<std::uint16_t>(out, static_cast<std::uint16_t>(cfg.input_w));
  Put<std::int16_t>(out, static_cast<std::int16_t>(pack.zmin));
  Put<std::int16_t>(out, static_cast<std::int16_t>(pack.zmax));
  Put<std::int16_t>(out, static_cast<std::int16_t>(pack.hmin));
  Put<std::int16_t>(out, static_cast<std::int16_t>(pack.hmax));
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(hyper_seg.size()));
  out.insert(out.end(), hyper_seg.begin(), hyper_seg.end());
  out.insert(out.end(), main_seg.begin(), main_seg.end());
  return out;
}

LatentPack Deserialize(std::span<const std::uint8_t> bytes,
                       HyperPrior<float>& hyper, const ModelConfig& cfg) {
  const StreamHeader hd = ParseHeader(bytes);
  if (hd.digest != cfg.Digest()) {
    throw BitstreamError("stream was produced by a different model config");
  }
  if (hd.height != cfg.input_h || hd.width != cfg.input_w) {
    throw BitstreamError("stream image size does not match model config");
  }
  if (hd.zmin > hd.zmax || hd.hmin > hd.hmax) {
    throw BitstreamError("empty alphabet bounds");
  }
  const int lh = cfg.latent_h(), lw = cfg.latent_w();
  LatentPack pack;
  pack.zmin = hd.zmin;
  pack.zmax = hd.zmax;
  pack.hmin = hd.hmin;
  pack.hmax = hd.hmax;

  const auto hyper_seg = bytes.subspan(kHeaderBytes, hd.hyper_bytes);
  const auto main_seg = bytes.subspan(kHeaderBytes + hd.hyper_bytes);
  try {
    const nn::Shape hs{cfg.hyper_h(), cfg.hyper_w(), cfg.channels_n};
    const EntropyTables ht = HyperTables(hyper, pack.hmin, pack.hmax);
    pack.h = nn::Tensor<std::int32_t>(
        hs, RangeDecode(hyper_seg,
                        ChannelContexts(static_cast<std::size_t>(
                                            nn::NumElements(hs)),
                                        cfg.channels_n),
                        ht));

    const ElementGaussians g = PredictGaussians(hyper, pack.h, lh, lw);
    const EntropyTables mt =
        BuildGaussianTables(g.mu, g.sigma, pack.zmin, pack.zmax);
    const nn::Shape zs{lh, lw, cfg.channels_m};
    pack.z = nn::Tensor<std::int32_t>(
        zs, RangeDecode(main_seg,
                        IotaContexts(static_cast<std::size_t>(
                            nn::NumElements(zs))),
                        mt));
  } catch (const CodingError& e) {
    throw BitstreamError(e.what());
  }
  return pack;
}

double RateEstimate(const LatentPack& pack, HyperPrior<float>& hyper) {
  pack.Validate();
  double bits = 0.0;
  const auto& loc = hyper.prior().loc().value;
  const auto& log_scale = hyper.prior().log_scale().value;
  const std::size_t n = static_cast<std::size_t>(pack.h.dim(2));
  for (std::size_t i = 0; i < pack.h.size(); ++i) {
    const std::size_t c = i % n;
    bits += BitsFromLikelihood(LogisticBinLikelihood(
        pack.h[i], loc[c], std::exp(static_cast<double>(log_scale[c]))));
  }
  const ElementGaussians g =
      PredictGaussians(hyper, pack.h, static_cast<int>(pack.z.dim(0)),
                       static_cast<int>(pack.z.dim(1)));
  for (std::size_t i = 0; i < pack.z.size(); ++i) {
    bits += BitsFromLikelihood(
        GaussianBinLikelihood(pack.z[i], g.mu[i], g.sigma[i]));
  }
  return bits;
}

double BitsPerPixel(std::size_t stream_bytes, int height, int width) {
  return 8.0 * static_cast<double>(stream_bytes) /
         (static_cast<double>(height) * width);
}

}  // namespace ecat::entropy
