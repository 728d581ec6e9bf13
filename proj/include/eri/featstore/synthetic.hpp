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

#include "eri/featstore/types.hpp"

namespace eri::featstore {

struct SynthSpec {
    std::uint32_t n_train = 200;
    std::uint32_t n_val = 50;
    std::uint32_t n_test = 0;
    std::uint32_t visual_dim = 24;
    std::uint32_t audio_dim = 12;
    std::uint32_t min_frames = 6;
    std::uint32_t max_frames = 16;
    double visual_hop = 0.2;
    double audio_hop = 0.32;
    /// share of train/val samples flagged face_detected=false
    double no_face_fraction = 0.1;
    /// weight of pooled audio features in the label function
    double audio_weight = 0.25;
    double frame_noise = 0.5;
    std::uint32_t latent_dim = 4;
};

/// Writes features/<id>.<modality>.erif, manifest.jsonl and labels.csv under
/// out_dir. Byte-identical output for equal (spec, seed).
DatasetManifest gen_synthetic(const SynthSpec& spec, std::uint64_t seed, const std::filesystem::path& out_dir);

} // namespace eri::featstore
