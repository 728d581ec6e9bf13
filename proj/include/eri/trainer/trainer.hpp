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
#include <vector>

#include "eri/encoders/checkpoint.hpp"
#include "eri/featstore/types.hpp"
#include "eri/objectives/metrics.hpp"
#include "eri/trainer/batching.hpp"

namespace eri::trainer {

struct EpochRecord {
    std::uint32_t epoch = 0;
    double train_loss = 0.0;
    double val_mean_pcc = 0.0;
    double val_mse = 0.0;
    double wall_time_s = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    std::uint32_t best_epoch = 0;
};

/// Train split after face filtering plus the full validation split, prepared
/// for one fusion mode. Shared read-only between runs.
struct TrainData {
    std::vector<PreparedSample> train;
    std::vector<PreparedSample> val;
    encoders::InputDims dims;
    std::size_t dropped_no_face = 0;
};

std::shared_ptr<const TrainData> load_train_data(const featstore::DatasetManifest& manifest,
                                                 const encoders::Hyperparams& hp);

/// One resumable training run: Adam, global-norm clipping, per-epoch
/// validation and patience-based early stopping. Single-threaded and
/// deterministic given (data, hp).
class TrainSession {
public:
    TrainSession(std::shared_ptr<const TrainData> data, encoders::Hyperparams hp);

    EpochRecord run_epoch();
    /// Runs until max_epochs or early stop.
    void run();

    bool finished() const;
    std::uint32_t epochs_done() const { return static_cast<std::uint32_t>(history_.epochs.size()); }
    const TrainHistory& history() const { return history_; }
    double best_score() const;
    const encoders::ModelParams& current_params() const { return params_; }
    /// Parameters of the best validation epoch.
    encoders::Checkpoint best_checkpoint() const;

private:
    void step(std::span<const std::size_t> batch, double& loss_sum, std::size_t& loss_count);

    std::shared_ptr<const TrainData> data_;
    encoders::Hyperparams hp_;
    encoders::ModelParams params_;
    encoders::ModelParams best_params_;
    encoders::ParamSet ps_;
    std::vector<std::vector<double>> adam_m_;
    std::vector<std::vector<double>> adam_v_;
    std::uint64_t global_step_ = 0;
    TrainHistory history_;
    bool stopped_early_ = false;
};

struct TrainResult {
    encoders::Checkpoint checkpoint;
    TrainHistory history;
};

TrainResult train(const featstore::DatasetManifest& manifest, encoders::Hyperparams hp);
TrainResult train(const featstore::DatasetManifest& manifest, encoders::Hyperparams hp, std::uint64_t seed);

/// Eval-mode predictions, one per input, in order.
std::vector<featstore::EmotionVector> predict_samples(const encoders::ModelParams& params,
                                                      const encoders::Hyperparams& hp,
                                                      std::span<const PreparedSample> samples);

struct Predictions {
    std::vector<std::string> sample_ids;
    std::vector<featstore::EmotionVector> values;

    bool operator==(const Predictions&) const = default;
};

/// Throws Data when the checkpoint's input dims differ from the manifest's.
void check_compatible(const encoders::Checkpoint& ckpt, const featstore::DatasetManifest& manifest);

Predictions predict(const encoders::Checkpoint& ckpt, const featstore::DatasetManifest& manifest,
                    featstore::Split split);
objectives::MetricReport evaluate(const encoders::Checkpoint& ckpt, const featstore::DatasetManifest& manifest,
                                  featstore::Split split);

/// Labels of a split in manifest order; throws Data if any is missing.
std::vector<featstore::EmotionVector> split_labels(const featstore::DatasetManifest& manifest,
                                                   featstore::Split split);

/// header sample_id,e0..e6; six-decimal fixed point.
void write_predictions_csv(const Predictions& p, const std::filesystem::path& path);
Predictions read_predictions_csv(const std::filesystem::path& path);

nlohmann::json to_json(const EpochRecord& r);
/// One epoch per line.
void write_history_jsonl(const TrainHistory& h, const std::filesystem::path& path);

} // namespace eri::trainer
