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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eri::featstore {

inline constexpr std::size_t kNumEmotions = 7;

/// Per-video reaction intensities, each in [0, 1].
using EmotionVector = std::array<double, kNumEmotions>;

void validate_emotion(const EmotionVector& v);

/// Display names for the seven emotions; defaults to emotion_0..emotion_6.
using EmotionNames = std::array<std::string, kNumEmotions>;
EmotionNames default_emotion_names();

inline constexpr std::string_view kVisual = "visual";
inline constexpr std::string_view kAudio = "audio";

/// One modality's per-frame embeddings. data is frames x dim, row-major.
struct FeatureSequence {
    std::string modality_id;
    std::uint32_t dim = 0;
    std::vector<double> timestamps;
    std::vector<float> data;

    std::size_t frames() const { return timestamps.size(); }
    bool empty() const { return timestamps.empty(); }
    std::span<const float> row(std::size_t t) const { return {data.data() + t * dim, dim}; }

    /// Throws Validation on any broken invariant.
    void validate() const;

    bool operator==(const FeatureSequence&) const = default;
};

enum class Split { Train, Val, Test };

std::string_view split_name(Split s);
Split parse_split(std::string_view s);

struct ManifestEntry {
    std::string sample_id;
    Split split = Split::Train;
    bool face_detected = true;
    std::optional<EmotionVector> label;
    /// modality_id -> feature file path (relative paths resolve against the manifest directory)
    std::map<std::string, std::filesystem::path> streams;

    bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    std::map<std::string, std::uint32_t> dims;
    std::filesystem::path base_dir;

    std::filesystem::path resolve(const std::filesystem::path& p) const {
        return p.is_absolute() ? p : base_dir / p;
    }
    std::size_t count(Split s) const;
    std::size_t count_labeled(Split s) const;
};

struct MultimodalSample {
    std::string sample_id;
    std::map<std::string, FeatureSequence> streams;
    std::optional<EmotionVector> label;
    Split split = Split::Train;
    bool face_detected = true;

    const FeatureSequence* stream(std::string_view modality) const;
};

} // namespace eri::featstore
