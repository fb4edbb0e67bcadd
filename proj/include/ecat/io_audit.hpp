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

#ifndef ECAT_IO_AUDIT_HPP_
#define ECAT_IO_AUDIT_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ecat {

// Process-wide record of file reads and image decodes done through the
// library. Not thread-safe; the CLI is single-threaded.
struct ReadAudit {
  std::vector<std::string> files;
  std::size_t images_decoded = 0;
};

class PixelAccessError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

void AuditFileRead(const std::string& path);
// Throws PixelAccessError while a PixelSeal is alive.
void AuditImageDecode();
// Returns the record and clears it.
ReadAudit TakeReadAudit();

// While alive, decoding any image is an error.
class PixelSeal {
 public:
  PixelSeal();
  ~PixelSeal();
  PixelSeal(const PixelSeal&) = delete;
  PixelSeal& operator=(const PixelSeal&) = delete;
};

}  // namespace ecat

#endif  // ECAT_IO_AUDIT_HPP_
