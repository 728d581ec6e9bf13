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

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "eri/encoders/checkpoint.hpp"
#include "eri/featstore/types.hpp"
#include "eri/trainer/trainer.hpp"

namespace eri::ensembler {

struct EnsembleSpec {
    std::vector<std::filesystem::path> members;
    /// empty means uniform
    std::vector<double> weights;

    static EnsembleSpec uniform(std::vector<std::filesystem::path> members);
    /// Resolved weights: positive, summing to 1 within 1e-12.
    std::vector<double> resolved_weights() const;
    void validate() const;
};

/// Weighted mean of member predictions per sample, clamped to [0, 1]. Members
/// are reduced in order by pairwise summation. Sample ids must agree.
trainer::Predictions combine(std::span<const trainer::Predictions> members, std::span<const double> weights);

trainer::Predictions ensemble_predict(const EnsembleSpec& spec, const featstore::DatasetManifest& manifest,
                                      featstore::Split split);

struct IncrementalRow {
    std::size_t k = 0;
    std::string member_id;
    double mean_pcc = 0.0;
};

/// Row k scores the ensemble of the first k members (weights renormalized over the prefix).
std::vector<IncrementalRow> incremental_report(std::span<const trainer::Predictions> members,
                                               std::span<const std::string> member_ids, std::span<const double> weights,
                                               std::span<const featstore::EmotionVector> labels);
std::vector<IncrementalRow> incremental_report(const EnsembleSpec& spec, const featstore::DatasetManifest& manifest,
                                               featstore::Split split);

/// Columns k,member_id,mean_pcc.
void write_report_csv(std::span<const IncrementalRow> rows, const std::filesystem::path& path);

} // namespace eri::ensembler
