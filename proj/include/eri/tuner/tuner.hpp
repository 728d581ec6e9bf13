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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "eri/encoders/hyperparams.hpp"
#include "eri/featstore/types.hpp"
#include "eri/trainer/trainer.hpp"

namespace eri::tuner {

struct SearchSpace {
    double lr_min = 1e-5;
    double lr_max = 2e-4;
    std::uint32_t batch_min = 8;
    std::uint32_t batch_max = 32;
    std::uint32_t hidden_min = 512;
    std::uint32_t hidden_max = 1024;
    encoders::LossKind loss_kind = encoders::LossKind::Mse;
    std::uint32_t trials = 100;
    std::uint32_t max_epochs_per_trial = 10;
    /// optional extra dimensions, off unless set
    std::optional<std::pair<double, double>> dropout_range;
    std::optional<std::pair<std::uint32_t, std::uint32_t>> layers_range;
    /// fields not searched over come from here
    encoders::Hyperparams base;

    void validate() const;
};

nlohmann::json to_json(const SearchSpace& s);

/// Pure function of (space, trial_id, seed). lr is uniform on its interval,
/// hidden_dim is rounded to the nearest multiple of num_heads inside the bounds.
encoders::Hyperparams sample_config(const SearchSpace& space, std::uint32_t trial_id, std::uint64_t seed);

/// Successive-halving rung epochs {1, 3, max} clipped to max.
std::vector<std::uint32_t> rung_epochs(std::uint32_t max_epochs);

enum class TrialStatus { Completed, Pruned };

struct EpochTrace {
    std::uint32_t epoch = 0;
    double train_loss = 0.0;
    double val_mean_pcc = 0.0;
    double val_mse = 0.0;

    bool operator==(const EpochTrace&) const = default;
};

struct TrialRecord {
    std::uint32_t trial_id = 0;
    encoders::Hyperparams hp;
    std::vector<EpochTrace> trace;
    TrialStatus status = TrialStatus::Pruned;
    /// best validation mean PCC over the epochs run
    double final_score = 0.0;
    std::uint32_t epochs_consumed = 0;
    std::string error;

    bool operator==(const TrialRecord&) const = default;
};

struct SearchResult {
    std::vector<TrialRecord> records;
    std::uint32_t best_trial_id = 0;
};

/// Runs every trial under the rung schedule; the bottom half (by best val mean
/// PCC, ties to lower id) is pruned after each intermediate rung. Survivors are
/// resumed by deterministic replay, so the table does not depend on parallelism.
SearchResult run_search(std::shared_ptr<const trainer::TrainData> data, const SearchSpace& space,
                        std::uint64_t seed, std::uint32_t parallelism);
SearchResult run_search(const featstore::DatasetManifest& manifest, const SearchSpace& space, std::uint64_t seed,
                        std::uint32_t parallelism);

/// argmax final_score over completed trials, ties to the lowest trial_id.
const TrialRecord& best_trial(std::span<const TrialRecord> records);

nlohmann::json to_json(const TrialRecord& r);
/// One TrialRecord per line.
std::string records_jsonl(std::span<const TrialRecord> records);
/// Writes trials.jsonl and search_summary.json into dir.
void write_search_results(const SearchResult& result, const std::filesystem::path& dir);

} // namespace eri::tuner
