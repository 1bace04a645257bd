// Copyright 2026 The itransf-kbc Authors.
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
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "itransf/model.h"
#include "json.hpp"

namespace itransf {

// Binary container:
//   8 bytes   magic "ITFCKPT\0"
//   u32       format version
//   u64       header length L
//   L bytes   JSON header {hyperparams, vocab_fingerprint, shapes, arrays, extra}
//   payload   arrays in header order, little-endian f64 or u8
// Doubles are stored as raw bits, so reload is bit-exact.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Hyperparams hp;
  std::uint64_t vocab_fingerprint = 0;
  ModelParams params;
  nlohmann::json extra = nlohmann::json::object();  // epoch, seed, ...
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace itransf
