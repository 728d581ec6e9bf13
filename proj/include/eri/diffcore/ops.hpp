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
#include <span>
#include <vector>

#include "eri/diffcore/tensor.hpp"

namespace eri::diff {

/// 1 = valid frame / key, 0 = masked.
using Mask = std::vector<std::uint8_t>;

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
/// x[m,n] + b[n] broadcast over rows
Tensor add_bias(const Tensor& x, const Tensor& b);
/// x W + b, with W: in x out
Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b);

Tensor relu(const Tensor& x);
/// Exact (erf-based) GELU.
Tensor gelu(const Tensor& x);
Tensor sigmoid(const Tensor& x);

/// Softmax over the last axis.
Tensor softmax(const Tensor& x);

/// Per-row normalization over the last axis; gamma and beta have cols() entries.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);

/// Stride-1, zero "same" padding. x: T x D, w: K x D x C (K odd), b: C. Output T x C.
Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b);

/// Scaled dot-product attention split into `heads` heads. q: Tq x D, k/v: Tk x D.
/// Masked keys get exactly zero weight (additive -inf mask).
Tensor multi_head_attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t heads,
                            std::span<const std::uint8_t> key_mask);

/// Attention weights of one head (Tq x Tk); forward-only introspection.
std::vector<double> attention_weights(const Tensor& q, const Tensor& k, std::size_t heads, std::size_t head,
                                      std::span<const std::uint8_t> key_mask);

/// Sinusoidal table, T x D, no gradient.
Tensor positional_encoding(std::size_t frames, std::size_t dim);

struct DropoutContext {
    std::uint64_t seed = 0;
    std::uint64_t step = 0;
    bool train = false;
    /// advanced by each dropout call; identifies the op instance within a step
    std::uint64_t next_instance = 0;
};

/// Inverted dropout. Eval mode (or p == 0) returns x unchanged. In train mode
/// the keep mask is a pure function of (seed, instance, step, element).
Tensor dropout(const Tensor& x, double p, DropoutContext& ctx);

/// Mean over unmasked rows -> 1 x D.
Tensor masked_mean_pool(const Tensor& x, std::span<const std::uint8_t> mask);
/// Zeroes masked rows.
Tensor mask_rows(const Tensor& x, std::span<const std::uint8_t> mask);

Tensor concat_cols(std::span<const Tensor> parts);
Tensor concat_rows(std::span<const Tensor> parts);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
/// sum_i x[i] * w[i] for constant weights.
Tensor dot_const(const Tensor& x, std::span<const double> w);

} // namespace eri::diff
