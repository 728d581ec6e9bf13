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
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eri/encoders/hyperparams.hpp"
#include "eri/featstore/synthetic.hpp"
#include "eri/tuner/tuner.hpp"

namespace eri::cli {

enum class Verbosity { Quiet, Info, Debug };

/// Everything a command needs, resolved from defaults < config file < flags.
struct RunConfig {
    std::filesystem::path manifest;
    std::filesystem::path out_dir;
    std::filesystem::path checkpoint;
    std::vector<std::filesystem::path> members;
    std::vector<double> member_weights;
    std::string split = "val";
    encoders::Hyperparams hp;
    tuner::SearchSpace search;
    featstore::SynthSpec synth;
    std::uint64_t seed = 42;
    std::uint32_t parallelism = 1;
    Verbosity verbosity = Verbosity::Info;
};

/// Applies a flat object of dotted keys ("hp.learning_rate", "paths.out", ...)
/// onto cfg. Unknown keys and type mismatches throw Config naming the key.
void apply_flat_config(RunConfig& cfg, const nlohmann::json& flat);
RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {});

/// Flat dotted-key view of the resolved config, as recorded in run summaries.
nlohmann::json to_flat_json(const RunConfig& cfg);

} // namespace eri::cli
