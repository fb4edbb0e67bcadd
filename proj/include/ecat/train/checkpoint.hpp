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

// Checkpoint file, little-endian:
//
//   "ECKP" | u8 version | u64 config digest | u8 stage | u32 epoch
//   | u32 count | count x (u16 name length, name, u8 rank, rank x u32 dims,
//   float32 values)
//
// The parameter table follows Model::Visit order; names and shapes are
// checked on load.

#ifndef ECAT_TRAIN_CHECKPOINT_HPP_
#define ECAT_TRAIN_CHECKPOINT_HPP_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecat/model/model.hpp"

namespace ecat::train {

inline constexpr std::uint8_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CheckpointInfo {
  std::uint64_t digest = 0;
  Stage stage = Stage::kPretrain;
  std::uint32_t epoch = 0;
};

std::vector<std::uint8_t> EncodeCheckpoint(Model<float>& model, Stage stage,
                                           std::uint32_t epoch);

// Overwrites the model's parameters. Throws CheckpointError on format,
// digest, name or shape mismatch.
CheckpointInfo DecodeCheckpoint(std::span<const std::uint8_t> bytes,
                                Model<float>& model);

void SaveCheckpoint(const std::string& path, Model<float>& model, Stage stage,
                    std::uint32_t epoch);
CheckpointInfo LoadCheckpoint(const std::string& path, Model<float>& model);

// Raw file helpers; throw std::ios_base::failure on I/O errors.
std::vector<std::uint8_t> ReadFileBytes(const std::string& path);
void WriteFileBytes(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace ecat::train

#endif  // ECAT_TRAIN_CHECKPOINT_HPP_
