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
#include <functional>
#include <span>
#include <vector>

#include "eri/diffcore/tensor.hpp"

namespace eri::diff {

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t worst_input = 0;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    std::size_t checked = 0;
};

/// Denominator floor for the relative error |a - n| / max(|a|, |n|, floor).
inline constexpr double kGradCheckFloor = 1e-3;

using ScalarFn = std::function<Tensor(std::span<const Tensor>)>;

/// Compares reverse-mode gradients of fn (which must return one element) with
/// central differences for every scalar of every input. Inputs must be
/// parameters; their values are restored afterwards.
GradCheckResult grad_check(const ScalarFn& fn, std::span<const Tensor> inputs, double eps = 1e-5);

/// Reduces any tensor to a scalar with fixed pseudo-random weights in [-1, 1],
/// so every output element contributes a distinct gradient.
Tensor random_projection(const Tensor& x, std::uint64_t seed);

} // namespace eri::diff
