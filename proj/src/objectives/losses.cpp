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

#include "eri/objectives/losses.hpp"

#include <cmath>
#include <memory>
#include <vector>

#include "eri/common/error.hpp"
#include "eri/objectives/metrics.hpp"

namespace eri::objectives {

namespace {

void check_batch(const diff::Tensor& pred, const diff::Tensor& target, const char* op) {
    require(pred.rank() == 2 && pred.cols() == kNumEmotions, ErrorKind::Validation,
            std::string(op) + ": predictions must be B x 7, got " + diff::shape_str(pred.shape()));
    require(pred.shape() == target.shape(), ErrorKind::Validation,
            std::string(op) + ": prediction/target shape mismatch " + diff::shape_str(pred.shape()) + " vs " +
                diff::shape_str(target.shape()));
}

} // namespace

diff::Tensor mse_loss(const diff::Tensor& pred, const diff::Tensor& target) {
    check_batch(pred, target, "mse_loss");
    const auto p = pred.values(), t = target.values();
    const double inv_n = 1.0 / static_cast<double>(p.size());
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - t[i]) * (p[i] - t[i]);
    return diff::Tensor::from_op("mse_loss", {1}, {s * inv_n}, {pred, target},
                                 [pred, target, inv_n](std::span<const double> g) {
                                     const auto p = pred.values(), t = target.values();
                                     if (pred.requires_grad()) {
                                         auto gp = pred.grad_buffer();
                                         for (std::size_t i = 0; i < p.size(); ++i)
                                             gp[i] += g[0] * 2.0 * (p[i] - t[i]) * inv_n;
                                     }
                                     if (target.requires_grad()) {
                                         auto gt = target.grad_buffer();
                                         for (std::size_t i = 0; i < p.size(); ++i)
                                             gt[i] -= g[0] * 2.0 * (p[i] - t[i]) * inv_n;
                                     }
                                 });
}

diff::Tensor pcc_loss(const diff::Tensor& pred, const diff::Tensor& target) {
    check_batch(pred, target, "pcc_loss");
    const std::size_t b = pred.rows();
    require(b >= 2, ErrorKind::Validation, "pcc_loss: batch of " + std::to_string(b) + " is too small (needs >= 2)");
    const double n = static_cast<double>(b);
    const auto p = pred.values(), t = target.values();

    // per-emotion d r / d pred, filled only for non-degenerate columns
    auto dr = std::make_shared<std::vector<double>>(p.size(), 0.0);
    double r_sum = 0.0;
    std::vector<double> xc(b), yc(b);
    for (std::size_t e = 0; e < kNumEmotions; ++e) {
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < b; ++i) {
            mx += p[i * kNumEmotions + e];
            my += t[i * kNumEmotions + e];
        }
        mx /= n;
        my /= n;
        double sxx = 0.0, syy = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < b; ++i) {
            xc[i] = p[i * kNumEmotions + e] - mx;
            yc[i] = t[i * kNumEmotions + e] - my;
            sxx += xc[i] * xc[i];
            syy += yc[i] * yc[i];
            sxy += xc[i] * yc[i];
        }
        if (sxx / n < kVarianceGuard || syy / n < kVarianceGuard) continue;
        const double denom = std::sqrt(sxx * syy);
        const double r = sxy / denom;
        r_sum += r;
        for (std::size_t i = 0; i < b; ++i) (*dr)[i * kNumEmotions + e] = yc[i] / denom - r * xc[i] / sxx;
    }
    const double inv_e = 1.0 / static_cast<double>(kNumEmotions);
    return diff::Tensor::from_op("pcc_loss", {1}, {1.0 - r_sum * inv_e}, {pred}, [pred, dr, inv_e](std::span<const double> g) {
        auto gp = pred.grad_buffer();
        for (std::size_t i = 0; i < gp.size(); ++i) gp[i] -= g[0] * inv_e * (*dr)[i];
    });
}

} // namespace eri::objectives
