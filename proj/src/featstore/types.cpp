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

#include "eri/featstore/types.hpp"

#include <cmath>
#include <string>

#include "eri/common/error.hpp"

namespace eri::featstore {

void validate_emotion(const EmotionVector& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i]) || v[i] < 0.0 || v[i] > 1.0) {
            fail(ErrorKind::Validation,
                 "emotion intensity " + std::to_string(i) + " outside [0,1]: " + std::to_string(v[i]));
        }
    }
}

EmotionNames default_emotion_names() {
    EmotionNames names;
    for (std::size_t i = 0; i < kNumEmotions; ++i) names[i] = "emotion_" + std::to_string(i);
    return names;
}

void FeatureSequence::validate() const {
    require(dim > 0, ErrorKind::Validation, "feature sequence '" + modality_id + "': dim must be positive");
    require(data.size() == frames() * dim, ErrorKind::Validation,
            "feature sequence '" + modality_id + "': data size does not equal frames*dim");
    for (std::size_t t = 0; t < timestamps.size(); ++t) {
        require(std::isfinite(timestamps[t]), ErrorKind::Validation,
                "feature sequence '" + modality_id + "': non-finite timestamp at frame " + std::to_string(t));
        if (t > 0 && !(timestamps[t] > timestamps[t - 1])) {
            fail(ErrorKind::Validation,
                 "feature sequence '" + modality_id + "': timestamps not strictly increasing at frame " +
                     std::to_string(t));
        }
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!std::isfinite(data[i])) {
            fail(ErrorKind::Validation, "feature sequence '" + modality_id + "': non-finite value at frame " +
                                            std::to_string(i / dim) + ", column " + std::to_string(i % dim));
        }
    }
}

std::string_view split_name(Split s) {
    switch (s) {
    case Split::Train:
        return "train";
    case Split::Val:
        return "val";
    case Split::Test:
        return "test";
    }
    return "train";
}

Split parse_split(std::string_view s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    fail(ErrorKind::Validation, "unknown split '" + std::string(s) + "' (expected train, val or test)");
}

std::size_t DatasetManifest::count(Split s) const {
    std::size_t n = 0;
    for (const auto& e : entries) n += e.split == s ? 1 : 0;
    return n;
}

std::size_t DatasetManifest::count_labeled(Split s) const {
    std::size_t n = 0;
    for (const auto& e : entries) n += (e.split == s && e.label) ? 1 : 0;
    return n;
}

const FeatureSequence* MultimodalSample::stream(std::string_view modality) const {
    auto it = streams.find(std::string(modality));
    return it == streams.end() ? nullptr : &it->second;
}

} // namespace eri::featstore
