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

#include "eri/encoders/hyperparams.hpp"

#include <cmath>
#include <string>

#include "eri/common/error.hpp"

namespace eri::encoders {

std::string_view to_string(LossKind k) { return k == LossKind::Mse ? "mse" : "pcc"; }

std::string_view to_string(FusionMode m) {
    switch (m) {
    case FusionMode::VisualOnly:
        return "visual_only";
    case FusionMode::AudioOnly:
        return "audio_only";
    case FusionMode::Concat:
        return "concat";
    case FusionMode::CrossAttention:
        return "cross_attention";
    }
    return "visual_only";
}

std::string_view to_string(ModelKind m) { return m == ModelKind::Te ? "te" : "resnet1d"; }

LossKind parse_loss_kind(std::string_view s) {
    if (s == "mse") return LossKind::Mse;
    if (s == "pcc") return LossKind::Pcc;
    fail(ErrorKind::Config, "loss_kind: expected mse or pcc, got '" + std::string(s) + "'");
}

FusionMode parse_fusion_mode(std::string_view s) {
    if (s == "visual_only") return FusionMode::VisualOnly;
    if (s == "audio_only") return FusionMode::AudioOnly;
    if (s == "concat") return FusionMode::Concat;
    if (s == "cross_attention") return FusionMode::CrossAttention;
    fail(ErrorKind::Config,
         "fusion_mode: expected visual_only, audio_only, concat or cross_attention, got '" + std::string(s) + "'");
}

ModelKind parse_model_kind(std::string_view s) {
    if (s == "te") return ModelKind::Te;
    if (s == "resnet1d") return ModelKind::ResNet1d;
    fail(ErrorKind::Config, "model: expected te or resnet1d, got '" + std::string(s) + "'");
}

void Hyperparams::validate() const {
    require(std::isfinite(learning_rate) && learning_rate > 0.0, ErrorKind::Config, "learning_rate must be > 0");
    require(batch_size >= 1, ErrorKind::Config, "batch_size must be >= 1");
    require(!(loss_kind == LossKind::Pcc && batch_size < 2), ErrorKind::Config,
            "batch_size must be >= 2 when loss_kind=pcc (correlation is undefined for one sample)");
    require(hidden_dim >= 1, ErrorKind::Config, "hidden_dim must be >= 1");
    require(num_heads >= 1, ErrorKind::Config, "num_heads must be >= 1");
    require(hidden_dim % num_heads == 0, ErrorKind::Config,
            "hidden_dim " + std::to_string(hidden_dim) + " is not divisible by num_heads " + std::to_string(num_heads));
    require(conv_kernel >= 1 && conv_kernel % 2 == 1, ErrorKind::Config, "conv_kernel must be odd and >= 1");
    require(dropout >= 0.0 && dropout < 1.0, ErrorKind::Config, "dropout must lie in [0,1)");
    require(max_epochs >= 1, ErrorKind::Config, "max_epochs must be >= 1");
    require(ff_multiplier >= 1, ErrorKind::Config, "ff_multiplier must be >= 1");
    require(std::isfinite(grad_clip) && grad_clip >= 0.0, ErrorKind::Config, "grad_clip must be >= 0");
    if (model == ModelKind::ResNet1d) {
        require(fusion_mode == FusionMode::VisualOnly || fusion_mode == FusionMode::AudioOnly, ErrorKind::Config,
                "fusion_mode must be visual_only or audio_only for model=resnet1d");
    }
}

nlohmann::json to_json(const Hyperparams& hp) {
    return {
        {"learning_rate", hp.learning_rate},
        {"batch_size", hp.batch_size},
        {"hidden_dim", hp.hidden_dim},
        {"num_heads", hp.num_heads},
        {"num_layers", hp.num_layers},
        {"conv_kernel", hp.conv_kernel},
        {"dropout", hp.dropout},
        {"loss_kind", std::string(to_string(hp.loss_kind))},
        {"fusion_mode", std::string(to_string(hp.fusion_mode))},
        {"max_epochs", hp.max_epochs},
        {"seed", hp.seed},
        {"model", std::string(to_string(hp.model))},
        {"positional_encoding", hp.positional_encoding},
        {"ff_multiplier", hp.ff_multiplier},
        {"patience", hp.patience},
        {"grad_clip", hp.grad_clip},
    };
}

Hyperparams hyperparams_from_json(const nlohmann::json& j, Hyperparams hp) {
    require(j.is_object(), ErrorKind::Config, "hyperparams must be a JSON object");
    for (const auto& [key, v] : j.items()) {
        auto u32 = [&key](const nlohmann::json& x) {
            require(x.is_number_unsigned(), ErrorKind::Config,
                    "hyperparameter '" + key + "' must be a non-negative integer");
            return x.get<std::uint32_t>();
        };
        try {
            if (key == "learning_rate") hp.learning_rate = v.get<double>();
            else if (key == "batch_size") hp.batch_size = u32(v);
            else if (key == "hidden_dim") hp.hidden_dim = u32(v);
            else if (key == "num_heads") hp.num_heads = u32(v);
            else if (key == "num_layers") hp.num_layers = u32(v);
            else if (key == "conv_kernel") hp.conv_kernel = u32(v);
            else if (key == "dropout") hp.dropout = v.get<double>();
            else if (key == "loss_kind") hp.loss_kind = parse_loss_kind(v.get<std::string>());
            else if (key == "fusion_mode") hp.fusion_mode = parse_fusion_mode(v.get<std::string>());
            else if (key == "max_epochs") hp.max_epochs = u32(v);
            else if (key == "seed") hp.seed = v.get<std::uint64_t>();
            else if (key == "model") hp.model = parse_model_kind(v.get<std::string>());
            else if (key == "positional_encoding") hp.positional_encoding = v.get<bool>();
            else if (key == "ff_multiplier") hp.ff_multiplier = u32(v);
            else if (key == "patience") hp.patience = u32(v);
            else if (key == "grad_clip") hp.grad_clip = v.get<double>();
            else fail(ErrorKind::Config, "unknown hyperparameter '" + key + "'");
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::Config, "hyperparameter '" + key + "': " + e.what());
        }
    }
    return hp;
}

} // namespace eri::encoders
