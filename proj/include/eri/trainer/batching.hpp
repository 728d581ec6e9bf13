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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eri/encoders/models.hpp"
#include "eri/featstore/types.hpp"

namespace eri::trainer {

/// A sample turned into model input for one fusion mode.
struct PreparedSample {
    std::string sample_id;
    encoders::ModelInput input;
    std::optional<featstore::EmotionVector> label;
};

std::vector<PreparedSample> prepare(std::span<const featstore::MultimodalSample> samples,
                                    const encoders::Hyperparams& hp);

/// Seeded shuffle of [0, n) cut into batches. A final batch smaller than
/// min_last is dropped.
std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                                   std::uint64_t epoch, std::size_t min_last = 1);

/// Pads every stream to the longest one in the batch, masking the padding.
std::vector<encoders::ModelInput> pad_batch(std::span<const encoders::ModelInput* const> inputs);

} // namespace eri::trainer
