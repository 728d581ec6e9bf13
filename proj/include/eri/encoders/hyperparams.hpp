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
#include <string>
#include <string_view>

#include <json.hpp>

namespace eri::encoders {

enum class LossKind { Mse, Pcc };
enum class FusionMode { VisualOnly, AudioOnly, Concat, CrossAttention };
enum class ModelKind { Te, ResNet1d };

std::string_view to_string(LossKind k);
std::string_view to_string(FusionMode m);
std::string_view to_string(ModelKind m);
LossKind parse_loss_kind(std::string_view s);
FusionMode parse_fusion_mode(std::string_view s);
ModelKind parse_model_kind(std::string_view s);

/// All knobs of one training run.
struct Hyperparams {
    double learning_rate = 1e-3;
    std::uint32_t batch_size = 16;
    std::uint32_t hidden_dim = 64;
    std::uint32_t num_heads = 4;
    std::uint32_t num_layers = 2;
    std::uint32_t conv_kernel = 3;
    double dropout = 0.1;
    LossKind loss_kind = LossKind::Mse;
    FusionMode fusion_mode = FusionMode::VisualOnly;
    std::uint32_t max_epochs = 10;
    std::uint64_t seed = 0;
    ModelKind model = ModelKind::Te;
    bool positional_encoding = true;
    /// feed-forward width = ff_multiplier * hidden_dim
    std::uint32_t ff_multiplier = 2;
    /// epochs without validation improvement before stopping; 0 disables
    std::uint32_t patience = 3;
    double grad_clip = 1.0;

    /// Throws Config naming the offending field.
    void validate() const;

    bool operator==(const Hyperparams&) const = default;
};

nlohmann::json to_json(const Hyperparams& hp);
/// Missing keys keep their defaults; unknown keys are rejected.
Hyperparams hyperparams_from_json(const nlohmann::json& j, Hyperparams base = {});

} // namespace eri::encoders
