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

#include "ecat/io_audit.hpp"

#include <utility>

namespace ecat {

namespace {

ReadAudit& Audit() {
  static ReadAudit audit;
  return audit;
}

int seals = 0;

}  // namespace

void AuditFileRead(const std::string& path) { Audit().files.push_back(path); }

void AuditImageDecode() {
  if (seals > 0) throw PixelAccessError("image decode on a sealed path");
  ++Audit().images_decoded;
}

ReadAudit TakeReadAudit() { return std::exchange(Audit(), ReadAudit{}); }

PixelSeal::PixelSeal() { ++seals; }
PixelSeal::~PixelSeal() { --seals; }

}  // namespace ecat
