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
#include <filesystem>
#include <span>

#include <json.hpp>

#include "eri/featstore/types.hpp"

namespace eri::objectives {

using featstore::EmotionVector;
using featstore::kNumEmotions;

/// Population variance below this makes a correlation degenerate; it is then reported as 0.
inline constexpr double kVarianceGuard = 1e-12;

struct MetricReport {
    double mse = 0.0;
    std::array<double, kNumEmotions> per_emotion_pcc{};
    double mean_pcc = 0.0;
    std::size_t n_samples = 0;

    bool operator==(const MetricReport&) const = default;
};

double mse(std::span<const EmotionVector> pred, std::span<const EmotionVector> target);

/// Sample Pearson correlation in [-1, 1]; 0 when either side is (near) constant.
double pcc(std::span<const double> x, std::span<const double> y);

/// Per-emotion PCC across samples, averaged over the seven emotions.
MetricReport mean_pcc(std::span<const EmotionVector> pred, std::span<const EmotionVector> target);

using CorrMatrix = std::array<std::array<double, kNumEmotions>, kNumEmotions>;

CorrMatrix label_corr_matrix(std::span<const EmotionVector> labels);

nlohmann::json to_json(const MetricReport& r);
MetricReport report_from_json(const nlohmann::json& j);

/// Header row and first column carry the emotion names.
void write_corr_csv(const CorrMatrix& m, const featstore::EmotionNames& names, const std::filesystem::path& path);

} // namespace eri::objectives
