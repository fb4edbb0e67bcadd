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

#include "ecat/model/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace ecat {

ModelConfig ModelConfig::Desk() { return ModelConfig{}; }

ModelConfig ModelConfig::Paper() {
  ModelConfig c;
  c.input_h = 224;
  c.input_w = 224;
  c.channels_n = 128;
  c.channels_m = 192;
  c.embed_c = 384;
  c.depth_l = 12;
  c.heads = 6;
  c.num_classes = 1000;
  return c;
}

ModelConfig ModelConfig::FromProfile(const std::string& name) {
  if (name == "desk") return Desk();
  if (name == "paper") return Paper();
  throw ConfigError("unknown profile '" + name + "' (expected desk or paper)");
}

int ModelConfig::ffn_hidden() const {
  return static_cast<int>(std::lround(ffn_ratio * embed_c));
}

void ModelConfig::Validate() const {
  auto positive = [](int v, const char* what) {
    if (v <= 0) throw ConfigError(std::string(what) + " must be positive");
  };
  positive(input_h, "input_h");
  positive(input_w, "input_w");
  positive(channels_n, "channels_n");
  positive(channels_m, "channels_m");
  positive(embed_c, "embed_c");
  positive(depth_l, "depth_l");
  positive(heads, "heads");
  positive(num_classes, "num_classes");
  if (input_h % 16 != 0 || input_w % 16 != 0) {
    throw ConfigError("input size must be a multiple of 16");
  }
  if (embed_c % heads != 0) throw ConfigError("embed_c not divisible by heads");
  if (embed_c % 4 != 0) throw ConfigError("embed_c not divisible by 4");
  if (depth_l < 3) throw ConfigError("depth_l must be >= 3 for aggregation");
  if (!(ffn_ratio > 0.0) || ffn_hidden() <= 0) {
    throw ConfigError("ffn_ratio must be positive");
  }
}

std::string ModelConfig::ToText() const {
  std::ostringstream os;
  os << "input_h=" << input_h << '\n'
     << "input_w=" << input_w << '\n'
     << "channels_n=" << channels_n << '\n'
     << "channels_m=" << channels_m << '\n'
     << "embed_c=" << embed_c << '\n'
     << "depth_l=" << depth_l << '\n'
     << "heads=" << heads << '\n'
     << "num_classes=" << num_classes << '\n'
     << "ffn_hidden=" << ffn_hidden() << '\n';
  return os.str();
}

std::uint64_t Fnv1a64(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t ModelConfig::Digest() const {
  const std::string text = ToText();
  return Fnv1a64(text.data(), text.size());
}

void ModelConfig::Apply(const std::map<std::string, std::string>& kv) {
  auto get_int = [&](const char* key, int& dst) {
    auto it = kv.find(key);
    if (it == kv.end()) return;
    try {
      std::size_t used = 0;
      dst = std::stoi(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw ConfigError(std::string("bad integer for ") + key + ": " +
                        it->second);
    }
  };
  get_int("input_h", input_h);
  get_int("input_w", input_w);
  get_int("channels_n", channels_n);
  get_int("channels_m", channels_m);
  get_int("embed_c", embed_c);
  get_int("depth_l", depth_l);
  get_int("heads", heads);
  get_int("num_classes", num_classes);
  if (auto it = kv.find("ffn_ratio"); it != kv.end()) {
    try {
      ffn_ratio = std::stod(it->second);
    } catch (const std::exception&) {
      throw ConfigError("bad ffn_ratio: " + it->second);
    }
  }
}

namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::map<std::string, std::string> ParseKeyValueText(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    }
    kv[Trim(line.substr(0, eq))] = Trim(line.substr(eq + 1));
  }
  return kv;
}

std::map<std::string, std::string> LoadKeyValueFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseKeyValueText(ss.str());
}

}  // namespace ecat
