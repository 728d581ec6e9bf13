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

#include "eri/diffcore/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "eri/common/error.hpp"
#include "eri/common/rng.hpp"
#include "eri/diffcore/ops.hpp"

namespace eri::diff {

GradCheckResult grad_check(const ScalarFn& fn, std::span<const Tensor> inputs, double eps) {
    require(eps > 0.0, ErrorKind::Validation, "grad_check: eps must be positive");
    std::vector<Tensor> params(inputs.begin(), inputs.end());
    for (auto& p : params) {
        require(p.requires_grad(), ErrorKind::Validation, "grad_check: every input must require a gradient");
        p.zero_grad();
    }
    const Tensor out = fn(params);
    out.backward();

    GradCheckResult res;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Tensor& p = params[pi];
        const auto g = p.grad_buffer();
        const std::vector<double> analytic(g.begin(), g.end());
        auto vals = p.mutable_values();
        for (std::size_t i = 0; i < vals.size(); ++i) {
            const double orig = vals[i];
            vals[i] = orig + eps;
            const double fp = fn(params).item();
            vals[i] = orig - eps;
            const double fm = fn(params).item();
            vals[i] = orig;
            const double numeric = (fp - fm) / (2.0 * eps);
            require(std::isfinite(numeric), ErrorKind::Numerical, "grad_check: non-finite finite difference");
            const double a = analytic[i];
            const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), kGradCheckFloor});
            ++res.checked;
            if (res.checked == 1 || rel > res.max_rel_error) {
                res.max_rel_error = rel;
                res.worst_input = pi;
                res.worst_index = i;
                res.analytic = a;
                res.numeric = numeric;
            }
        }
    }
    return res;
}

Tensor random_projection(const Tensor& x, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> w(x.size());
    for (auto& v : w) v = rng.uniform(-1.0, 1.0);
    return dot_const(x, w);
}

} // namespace eri::diff
