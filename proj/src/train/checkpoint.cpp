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

#include "ecat/train/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "ecat/io_audit.hpp"

namespace ecat::train {

namespace {

constexpr char kMagic[4] = {'E', 'C', 'K', 'P'};

class Writer {
 public:
  template <typename U>
  void Put(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      out.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * i)));
    }
  }
  void PutFloat(float f) { Put(std::bit_cast<std::uint32_t>(f)); }
  void PutBytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
  }
  std::vector<std::uint8_t> out;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  template <typename U>
  U Get() {
    Need(sizeof(U));
    std::uint64_t r = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      r |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    }
    pos_ += sizeof(U);
    return static_cast<U>(r);
  }
  float GetFloat() { return std::bit_cast<float>(Get<std::uint32_t>()); }
  std::string GetString(std::size_t n) {
    Need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void Need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw CheckpointError("truncated checkpoint");
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> EncodeCheckpoint(Model<float>& model, Stage stage,
                                           std::uint32_t epoch) {
  const auto params = model.Parameters();
  Writer w;
  w.PutBytes(kMagic, 4);
  w.Put<std::uint8_t>(kCheckpointVersion);
  w.Put<std::uint64_t>(model.config().Digest());
  w.Put<std::uint8_t>(stage == Stage::kPretrain ? 1 : 2);
  w.Put<std::uint32_t>(epoch);
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(params.size()));
  for (const nn::Parameter<float>* p : params) {
    w.Put<std::uint16_t>(static_cast<std::uint16_t>(p->name.size()));
    w.PutBytes(p->name.data(), p->name.size());
    w.Put<std::uint8_t>(static_cast<std::uint8_t>(p->value.rank()));
    for (std::int64_t d : p->value.shape()) w.Put<std::uint32_t>(static_cast<std::uint32_t>(d));
    for (float v : p->value.values()) w.PutFloat(v);
  }
  return std::move(w.out);
}

CheckpointInfo DecodeCheckpoint(std::span<const std::uint8_t> bytes,
                                Model<float>& model) {
  Reader r(bytes);
  if (r.GetString(4) != std::string(kMagic, 4)) {
    throw CheckpointError("bad checkpoint magic");
  }
  if (r.Get<std::uint8_t>() != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version");
  }
  CheckpointInfo info;
  info.digest = r.Get<std::uint64_t>();
  if (info.digest != model.config().Digest()) {
    throw CheckpointError("checkpoint was written for a different model config");
  }
  const auto stage = r.Get<std::uint8_t>();
  if (stage != 1 && stage != 2) throw CheckpointError("bad stage tag");
  info.stage = stage == 1 ? Stage::kPretrain : Stage::kFull;
  info.epoch = r.Get<std::uint32_t>();

  const auto params = model.Parameters();
  if (r.Get<std::uint32_t>() != params.size()) {
    throw CheckpointError("parameter count mismatch");
  }
  // Decode into scratch first so a bad file leaves the model untouched.
  std::vector<std::vector<float>> values(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const nn::Parameter<float>& p = *params[i];
    const std::string name = r.GetString(r.Get<std::uint16_t>());
    if (name != p.name) {
      throw CheckpointError("expected parameter " + p.name + ", found " + name);
    }
    nn::Shape shape(r.Get<std::uint8_t>());
    for (auto& d : shape) d = r.Get<std::uint32_t>();
    if (shape != p.value.shape()) {
      throw CheckpointError("shape mismatch for " + p.name);
    }
    values[i].resize(p.value.size());
    for (float& v : values[i]) v = r.GetFloat();
  }
  if (!r.done()) throw CheckpointError("trailing bytes in checkpoint");
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i]->value.storage() = std::move(values[i]);
  }
  return info;
}

std::vector<std::uint8_t> ReadFileBytes(const std::string& path) {
  AuditFileRead(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

void WriteFileBytes(const std::string& path,
                    std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::ios_base::failure("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::ios_base::failure("write failed for " + path);
}

void SaveCheckpoint(const std::string& path, Model<float>& model, Stage stage,
                    std::uint32_t epoch) {
  WriteFileBytes(path, EncodeCheckpoint(model, stage, epoch));
}

CheckpointInfo LoadCheckpoint(const std::string& path, Model<float>& model) {
  return DecodeCheckpoint(ReadFileBytes(path), model);
}

}  // namespace ecat::train
