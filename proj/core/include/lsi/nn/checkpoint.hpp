// Copyright 2026 The LSI Authors
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

// Checkpoint container:
//
//   "LSIC" | u32 version | u64 manifest bytes | manifest (UTF-8 JSON) | payload
//
// The manifest lists every array (name, shape, trainable flag, byte offsets of
// the value and EMA copies within the payload), the step counter and an echo
// of the run configuration. The payload is row-major little-endian binary32.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lsi/nn/params.hpp"

namespace lsi::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct LoadedCheckpoint {
  ParameterStore store;
  /// Canonical JSON text of the embedded configuration.
  std::string config_json;
};

std::vector<std::uint8_t> serialize_checkpoint(const ParameterStore& store, std::string_view config_json);
LoadedCheckpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const ParameterStore& store, std::string_view config_json);
/// Throws std::runtime_error when the file is missing or malformed.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace lsi::nn
