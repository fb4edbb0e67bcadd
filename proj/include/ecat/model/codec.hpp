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

// Inference entry points. Everything on the receiving side takes latent
// packs or stream bytes only; no image is reachable from these calls.

#ifndef ECAT_MODEL_CODEC_HPP_
#define ECAT_MODEL_CODEC_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "ecat/entropy/bitstream.hpp"
#include "ecat/model/model.hpp"

namespace ecat {

// x01: [B,H,W,3] in [0,1]. Rounds z and h; bounds from observed symbols.
std::vector<entropy::LatentPack> EncodeImages(Model<float>& model,
                                              const nn::Tensor<float>& x01);

// Stacks the main latents into [B,h,w,M].
nn::Tensor<float> StackLatents(std::span<const entropy::LatentPack> packs);

// Class probabilities [B,K].
nn::Tensor<float> ClassifyPacks(Model<float>& model,
                                std::span<const entropy::LatentPack> packs);

// Reconstructions [B,H,W,3] in [0,1] units, unclamped.
nn::Tensor<float> ReconstructPacks(Model<float>& model,
                                   std::span<const entropy::LatentPack> packs,
                                   const FeatureMask& mask = FeatureMask::All());

std::vector<std::uint8_t> CompressImage(Model<float>& model,
                                        const nn::Tensor<float>& x01);

entropy::LatentPack ReadStream(Model<float>& model,
                               std::span<const std::uint8_t> bytes);

}  // namespace ecat

#endif  // ECAT_MODEL_CODEC_HPP_
