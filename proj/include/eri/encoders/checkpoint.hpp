// Copyright 2026 The ERI Toolkit Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "eri/encoders/hyperparams.hpp"
#include "eri/encoders/models.hpp"
#include "eri/encoders/params.hpp"

namespace eri::encoders {

inline constexpr char kCheckpointMagic[4] = {'E', 'R', 'I', 'C'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    Hyperparams hp;
    InputDims input_dims;
    ModelParams params;
    /// training provenance (seed, best epoch, dataset counts, ...)
    nlohmann::json metadata = nlohmann::json::object();

    bool operator==(const Checkpoint&) const = default;
};

/// Layout (little-endian):
///   "ERIC" | u32 version | u32 header_len | header JSON
///   | u32 count | count x (u32 name_len, name, u32 rank, u32 dims[rank])
///   | f32 data of every tensor, in table order
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

} // namespace eri::encoders
