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

#include "eri/trainer/batching.hpp"

#include <algorithm>
#include <numeric>

#include "eri/common/rng.hpp"

namespace eri::trainer {

std::vector<PreparedSample> prepare(std::span<const featstore::MultimodalSample> samples,
                                    const encoders::Hyperparams& hp) {
    std::vector<PreparedSample> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back({s.sample_id, encoders::make_input(s, hp), s.label});
    return out;
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                                   std::uint64_t epoch, std::size_t min_last) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(hash_combine(hash_combine(seed, 0xba7c'0000ULL), epoch));
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)));
        std::swap(order[i - 1], order[j]);
    }
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t end = std::min(n, start + batch_size);
        if (end - start < min_last) break;
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
}

std::vector<encoders::ModelInput> pad_batch(std::span<const encoders::ModelInput* const> inputs) {
    std::size_t primary = 0, secondary = 0;
    for (const auto* in : inputs) {
        primary = std::max(primary, in->primary.features.rows());
        if (in->secondary) secondary = std::max(secondary, in->secondary->features.rows());
    }
    std::vector<encoders::ModelInput> out;
    out.reserve(inputs.size());
    for (const auto* in : inputs) {
        encoders::ModelInput p{encoders::pad_sequence(in->primary, primary), std::nullopt};
        if (in->secondary) p.secondary = encoders::pad_sequence(*in->secondary, secondary);
        out.push_back(std::move(p));
    }
    return out;
}

} // namespace eri::trainer
