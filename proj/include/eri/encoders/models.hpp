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
#include <map>
#include <optional>
#include <span>
#include <string>

#include "eri/diffcore/ops.hpp"
#include "eri/encoders/hyperparams.hpp"
#include "eri/encoders/params.hpp"
#include "eri/featstore/types.hpp"

namespace eri::encoders {

inline constexpr std::size_t kResNetBlocks = 7;
inline constexpr double kLayerNormEps = 1e-5;

/// modality_id -> feature dimension
using InputDims = std::map<std::string, std::uint32_t>;

struct SequenceInput {
    diff::Tensor features;  // T x D, constant
    diff::Mask mask;        // length T
};

/// primary: the stream a single-stack model reads (visual, audio, or the
/// stitched concat). secondary: the audio stream in cross-attention mode.
struct ModelInput {
    SequenceInput primary;
    std::optional<SequenceInput> secondary;
};

struct ForwardContext {
    diff::DropoutContext dropout;  // dropout.train selects train mode

    static ForwardContext eval() { return {}; }
    static ForwardContext training(std::uint64_t seed, std::uint64_t step) { return {{seed, step, true, 0}}; }
};

std::string architecture_tag(const Hyperparams& hp);

/// Feature dimensions the model consumes for hp.fusion_mode. Throws Data when a
/// required modality is missing.
InputDims required_dims(const Hyperparams& hp, const InputDims& available);

/// Deterministic fan-in scaled uniform init; layer-norm gains 1, biases 0.
ModelParams init_params(const Hyperparams& hp, const InputDims& input_dims, std::uint64_t seed);

std::size_t resnet_block_count(const ModelParams& params);

/// conv1d -> [positional encoding] -> pre-norm encoder blocks -> masked mean
/// pool -> 2-layer head -> logistic squash. Returns 1 x 7.
diff::Tensor te_forward(const ParamSet& ps, const Hyperparams& hp, const diff::Tensor& features,
                        std::span<const std::uint8_t> mask, ForwardContext& ctx);

/// stem conv -> 7 residual blocks -> masked average pool -> head. Returns 1 x 7.
diff::Tensor resnet1d_forward(const ParamSet& ps, const Hyperparams& hp, const diff::Tensor& features,
                              std::span<const std::uint8_t> mask, ForwardContext& ctx);

/// One residual block; a 1x1 projection named <prefix>.proj.w is used on the
/// skip path when it is present in ps.
diff::Tensor resnet_block(const ParamSet& ps, const std::string& prefix, const diff::Tensor& x,
                          std::span<const std::uint8_t> mask);

/// Per-modality front ends; each stream queries the other stream's memory.
diff::Tensor cross_attention_forward(const ParamSet& ps, const Hyperparams& hp, const SequenceInput& visual,
                                     const SequenceInput& audio, ForwardContext& ctx);

/// Dispatches on hp.model and hp.fusion_mode.
diff::Tensor forward(const ParamSet& ps, const Hyperparams& hp, const ModelInput& input, ForwardContext& ctx);

SequenceInput to_sequence_input(const featstore::FeatureSequence& seq);
/// Appends zero frames with mask 0 up to `frames`.
SequenceInput pad_sequence(const SequenceInput& in, std::size_t frames);

/// Selects / stitches the streams required by hp.fusion_mode.
ModelInput make_input(const featstore::MultimodalSample& sample, const Hyperparams& hp);
ModelInput make_input(const featstore::FeatureSequence* visual, const featstore::FeatureSequence* audio,
                      const Hyperparams& hp);

featstore::EmotionVector to_emotion(const diff::Tensor& out);

/// Convenience wrapper over forward() for a visual/audio pair.
featstore::EmotionVector fuse_forward(const ModelParams& params, const Hyperparams& hp,
                                      const featstore::FeatureSequence* visual, const featstore::FeatureSequence* audio,
                                      bool train_mode, std::uint64_t dropout_seed = 0);

} // namespace eri::encoders
