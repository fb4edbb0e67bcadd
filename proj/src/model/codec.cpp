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

#include "ecat/model/codec.hpp"

#include <algorithm>

namespace ecat {

namespace {

nn::Tensor<std::int32_t> Slice(const nn::Tensor<std::int32_t>& batch,
                               std::int64_t b) {
  nn::Shape s(batch.shape().begin() + 1, batch.shape().end());
  const auto n = static_cast<std::size_t>(nn::NumElements(s));
  const auto* p = batch.data() + static_cast<std::size_t>(b) * n;
  return nn::Tensor<std::int32_t>(s, std::vector<std::int32_t>(p, p + n));
}

}  // namespace

std::vector<entropy::LatentPack> EncodeImages(Model<float>& model,
                                              const nn::Tensor<float>& x01) {
  nn::Tape<float> tape(false);
  const nn::Var<float> z =
      model.encoder()(tape, tape.Constant(model.Normalize(x01)));
  const nn::Var<float> h = model.hyper().Encode(tape, z);
  const nn::Tensor<std::int32_t> zq = QuantizeToSymbols(z.value());
  const nn::Tensor<std::int32_t> hq = QuantizeToSymbols(h.value());
  std::vector<entropy::LatentPack> packs;
  for (std::int64_t b = 0; b < x01.dim(0); ++b) {
    packs.push_back(entropy::LatentPack::FromSymbols(Slice(zq, b), Slice(hq, b)));
  }
  return packs;
}

nn::Tensor<float> StackLatents(std::span<const entropy::LatentPack> packs) {
  if (packs.empty()) throw std::invalid_argument("no latent packs");
  nn::Shape s{static_cast<std::int64_t>(packs.size())};
  const nn::Shape& one = packs[0].z.shape();
  s.insert(s.end(), one.begin(), one.end());
  nn::Tensor<float> out(s);
  std::size_t k = 0;
  for (const auto& p : packs) {
    if (p.z.shape() != one) throw nn::ShapeError("latent packs differ in shape");
    for (std::int32_t v : p.z.values()) out[k++] = static_cast<float>(v);
  }
  return out;
}

nn::Tensor<float> ClassifyPacks(Model<float>& model,
                                std::span<const entropy::LatentPack> packs) {
  nn::Tape<float> tape(false);
  const nn::Var<float> z = tape.Constant(StackLatents(packs));
  const EmbeddedTokens<float> emb = model.head().Embed(tape, z);
  const TransformerOutputs<float> tr = model.head().Forward(tape, emb.seq);
  return nn::SoftmaxRows(model.head().Logits(tape, tr.cls).value());
}

nn::Tensor<float> ReconstructPacks(Model<float>& model,
                                   std::span<const entropy::LatentPack> packs,
                                   const FeatureMask& mask) {
  nn::Tape<float> tape(false);
  return model.Decode(tape, tape.Constant(StackLatents(packs)), mask)
      .recon.value();
}

std::vector<std::uint8_t> CompressImage(Model<float>& model,
                                        const nn::Tensor<float>& x01) {
  nn::Tensor<float> batch = x01;
  if (batch.rank() == 3) {
    nn::Shape s{1};
    s.insert(s.end(), x01.shape().begin(), x01.shape().end());
    batch.Reshape(s);
  }
  if (batch.dim(0) != 1) throw std::invalid_argument("expected one image");
  const auto packs = EncodeImages(model, batch);
  return entropy::Serialize(packs[0], model.hyper(), model.config());
}

entropy::LatentPack ReadStream(Model<float>& model,
                               std::span<const std::uint8_t> bytes) {
  return entropy::Deserialize(bytes, model.hyper(), model.config());
}

}  // namespace ecat
