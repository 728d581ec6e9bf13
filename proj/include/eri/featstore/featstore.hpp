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

#include "eri/featstore/types.hpp"

namespace eri::featstore {

inline constexpr char kFeatureMagic[4] = {'E', 'R', 'I', 'F'};
inline constexpr std::uint32_t kFeatureVersion = 1;

struct FeatureHeader {
    std::uint32_t version = 0;
    std::uint32_t dim = 0;
    std::uint32_t frames = 0;
};

/// Little-endian: "ERIF" | u32 version | u32 dim | u32 frames | f64 timestamps[frames] | f32 data[frames*dim]
FeatureSequence read_feature_file(const std::filesystem::path& path, std::string modality_id = {});
FeatureHeader read_feature_header(const std::filesystem::path& path);
void write_feature_file(const FeatureSequence& seq, const std::filesystem::path& path);

std::vector<std::uint8_t> encode_feature_sequence(const FeatureSequence& seq);
FeatureSequence decode_feature_sequence(std::span<const std::uint8_t> bytes, std::string modality_id = {});

/// JSON-lines manifest. Reading checks that every referenced file exists and
/// that each modality has a single dimensionality across the dataset.
DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Drops train entries whose face was not detected; val/test entries are kept
/// as-is, fallback visual content included.
DatasetManifest filter_trainable(const DatasetManifest& manifest);

enum class AlignPolicy { Nearest, Truncate };

/// For each reference timestamp, the index of the closest other timestamp
/// (ties resolve to the earlier frame).
std::vector<std::size_t> nearest_indices(std::span<const double> reference, std::span<const double> other);

/// Stitches streams along the feature axis on the first stream's timeline.
FeatureSequence concat_streams(std::span<const FeatureSequence> seqs, AlignPolicy policy = AlignPolicy::Nearest);

MultimodalSample load_sample(const DatasetManifest& manifest, const ManifestEntry& entry);
std::vector<MultimodalSample> load_split(const DatasetManifest& manifest, Split split);

/// header sample_id,e0..e6; unlabeled entries are skipped.
void write_labels_csv(const DatasetManifest& manifest, const std::filesystem::path& path);

} // namespace eri::featstore
