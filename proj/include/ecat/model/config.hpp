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

#ifndef ECAT_MODEL_CONFIG_HPP_
#define ECAT_MODEL_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

namespace ecat {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Architecture hyperparameters shared by encoder and decoder.
struct ModelConfig {
  int input_h = 64;
  int input_w = 64;
  int channels_n = 32;   // N: encoder/decoder/hyper width
  int channels_m = 48;   // M: latent channels
  int embed_c = 96;      // C: transformer width
  int depth_l = 4;       // L: transformer blocks
  int heads = 4;
  int num_classes = 10;
  double ffn_ratio = 4.0;

  static ModelConfig Desk();
  static ModelConfig Paper();
  // "desk" or "paper"; throws ConfigError otherwise.
  static ModelConfig FromProfile(const std::string& name);

  int latent_h() const { return input_h / 16; }
  int latent_w() const { return input_w / 16; }
  int tokens() const { return latent_h() * latent_w(); }
  int ffn_hidden() const;
  // Hyper-latent extent: latent padded to a multiple of 4, then /4.
  int hyper_h() const { return (latent_h() + 3) / 4; }
  int hyper_w() const { return (latent_w() + 3) / 4; }

  void Validate() const;

  // Canonical "key=value" lines in a fixed order.
  std::string ToText() const;
  // FNV-1a 64 of ToText().
  std::uint64_t Digest() const;

  // Overrides known keys; unknown keys are ignored so a single file can hold
  // model and training settings.
  void Apply(const std::map<std::string, std::string>& kv);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Parses "key=value" lines; '#' starts a comment, blank lines are skipped.
std::map<std::string, std::string> ParseKeyValueText(const std::string& text);
std::map<std::string, std::string> LoadKeyValueFile(const std::string& path);

std::uint64_t Fnv1a64(const void* data, std::size_t size);

}  // namespace ecat

#endif  // ECAT_MODEL_CONFIG_HPP_
