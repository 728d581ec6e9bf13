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

#include <doctest.h>

#include <cmath>
#include <limits>

#include "eri/diffcore/gradcheck.hpp"
#include "eri/diffcore/ops.hpp"
#include "support/grad_suite.hpp"
#include "support/test_util.hpp"

using namespace eri;
using namespace eri::diff;
using eri::test::rand_param;

namespace {

Tensor ones(Shape s) { return Tensor::constant(s, std::vector<double>(shape_size(s), 1.0)); }

} // namespace

TEST_CASE("every op passes finite-difference checks on random instances") {
    for (const auto& c : test::op_grad_cases()) {
        Rng rng(hash_combine(0x6c6b, std::hash<std::string>{}(c.op)));
        double worst = 0.0;
        for (int i = 0; i < 12; ++i) worst = std::max(worst, c.run(rng).max_rel_error);
        CAPTURE(c.op);
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("tight gradient examples") {
    Rng rng(5);
    SUBCASE("conv1d on 5x3") {
        const auto r = grad_check(
            [](std::span<const Tensor> in) { return random_projection(conv1d(in[0], in[1], in[2]), 1); },
            std::vector<Tensor>{rand_param(rng, {5, 3}), rand_param(rng, {3, 3, 2}), rand_param(rng, {2})});
        CHECK(r.max_rel_error < 1e-6);
    }
    SUBCASE("attention on 3x4, two heads") {
        const Mask m = {1, 1, 1};
        const auto r = grad_check(
            [&m](std::span<const Tensor> in) {
                return random_projection(multi_head_attention(in[0], in[1], in[2], 2, m), 2);
            },
            std::vector<Tensor>{rand_param(rng, {3, 4}), rand_param(rng, {3, 4}), rand_param(rng, {3, 4})});
        CHECK(r.max_rel_error < 1e-6);
    }
    SUBCASE("affine on 2x3") {
        const auto r = grad_check(
            [](std::span<const Tensor> in) { return random_projection(affine(in[0], in[1], in[2]), 3); },
            std::vector<Tensor>{rand_param(rng, {2, 3}), rand_param(rng, {3, 4}), rand_param(rng, {4})});
        CHECK(r.max_rel_error < 1e-7);
        CHECK(r.checked == 6 + 12 + 4);
    }
}

TEST_CASE("conv1d examples") {
    Rng rng(8);
    const auto x = rand_param(rng, {6, 3});

    // K=1 identity kernel
    std::vector<double> eye(9, 0.0);
    for (int i = 0; i < 3; ++i) eye[i * 3 + i] = 1.0;
    const auto y = conv1d(x, Tensor::constant({1, 3, 3}, eye), Tensor::zeros({3}));
    CHECK(std::vector<double>(y.values().begin(), y.values().end()) ==
          std::vector<double>(x.values().begin(), x.values().end()));

    // direct sum over the zero-padded window
    const auto s = conv1d(ones({4, 1}), ones({3, 1, 1}), Tensor::zeros({1}));
    CHECK(std::vector<double>(s.values().begin(), s.values().end()) == std::vector<double>{2, 3, 3, 2});

    CHECK_THROWS(conv1d(x, ones({2, 3, 1}), Tensor::zeros({1})));
    CHECK_THROWS(conv1d(x, ones({3, 2, 1}), Tensor::zeros({1})));
}

TEST_CASE("conv1d locality") {
    Rng rng(10);
    for (std::size_t k : {1u, 3u, 5u, 7u}) {
        const std::size_t t = 12, half = k / 2;
        auto x = rand_param(rng, {t, 2});
        const auto w = rand_param(rng, {k, 2, 3});
        const auto b = rand_param(rng, {3});
        const auto base = conv1d(x, w, b);
        const std::vector<double> before(base.values().begin(), base.values().end());
        const std::size_t hit = 6;
        x.mutable_values()[hit * 2 + 1] += 1.0;
        const auto after = conv1d(x, w, b);
        for (std::size_t r = 0; r < t; ++r) {
            bool changed = false;
            for (std::size_t c = 0; c < 3; ++c) changed |= after.at(r, c) != before[r * 3 + c];
            const bool near = (r + half >= hit) && (r <= hit + half);
            CAPTURE(k);
            CAPTURE(r);
            if (!near) CHECK_FALSE(changed);
        }
    }
}

TEST_CASE("attention degeneracies and masking") {
    Rng rng(12);
    // identical keys give uniform weights, so the output is the mean of the values
    std::vector<double> krow = test::normal_vec(rng, 4), kv;
    for (int i = 0; i < 5; ++i) kv.insert(kv.end(), krow.begin(), krow.end());
    const auto k = Tensor::constant({5, 4}, kv);
    const auto v = rand_param(rng, {5, 4});
    const auto q = rand_param(rng, {3, 4});
    const Mask all(5, 1);
    const auto out = multi_head_attention(q, k, v, 2, all);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 4; ++c) {
            double m = 0;
            for (std::size_t j = 0; j < 5; ++j) m += v.at(j, c);
            CHECK(out.at(r, c) == doctest::Approx(m / 5).epsilon(1e-12));
        }

    // hiding the last key makes its content irrelevant
    const Mask hide_last = {1, 1, 1, 1, 0};
    auto k2 = rand_param(rng, {5, 4});
    auto v2 = rand_param(rng, {5, 4});
    const auto a = multi_head_attention(q, k2, v2, 2, hide_last);
    const std::vector<double> av(a.values().begin(), a.values().end());
    for (std::size_t c = 0; c < 4; ++c) {
        k2.mutable_values()[16 + c] = 1e3 * rng.normal();
        v2.mutable_values()[16 + c] = 1e3 * rng.normal();
    }
    const auto b = multi_head_attention(q, k2, v2, 2, hide_last);
    CHECK(std::vector<double>(b.values().begin(), b.values().end()) == av);

    for (std::size_t h = 0; h < 2; ++h) {
        const auto w = attention_weights(q, k2, 2, h, hide_last);
        for (std::size_t r = 0; r < 3; ++r) {
            double s = 0;
            for (std::size_t j = 0; j < 5; ++j) s += w[r * 5 + j];
            CHECK(w[r * 5 + 4] == 0.0);
            CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        }
    }

    CHECK_THROWS(multi_head_attention(q, k2, v2, 3, all));
    CHECK_THROWS(multi_head_attention(q, k2, v2, 2, Mask(5, 0)));
    CHECK_THROWS(multi_head_attention(q, k2, v2, 2, Mask(4, 1)));
}

TEST_CASE("softmax and layer norm examples") {
    for (std::size_t n : {1u, 2u, 5u, 9u}) {
        const auto s = softmax(Tensor::constant({1, n}, std::vector<double>(n, 0.3)));
        for (double v : s.values()) CHECK(v == doctest::Approx(1.0 / n).epsilon(1e-15));
    }
    Rng rng(4);
    const auto big = softmax(rand_param(rng, {20, 11}, 30.0));
    for (std::size_t r = 0; r < 20; ++r) {
        double sum = 0;
        for (std::size_t c = 0; c < 11; ++c) {
            CHECK(big.at(r, c) >= 0.0);
            sum += big.at(r, c);
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }

    const auto ln = layer_norm(Tensor::constant({2, 4}, {0.7, 0.7, 0.7, 0.7, -3, -3, -3, -3}), ones({4}),
                               Tensor::zeros({4}));
    for (double v : ln.values()) CHECK(v == 0.0);
}

TEST_CASE("dropout") {
    Rng rng(21);
    const auto x = rand_param(rng, {8, 16});
    DropoutContext eval_ctx;
    const auto e = dropout(x, 0.5, eval_ctx);
    CHECK(e.node() == x.node());

    auto run = [&](std::uint64_t seed, std::uint64_t step, std::uint64_t skip) {
        DropoutContext ctx{seed, step, true, 0};
        for (std::uint64_t i = 0; i < skip; ++i) dropout(x, 0.5, ctx);
        const auto y = dropout(x, 0.5, ctx);
        return std::vector<double>(y.values().begin(), y.values().end());
    };
    CHECK(run(1, 0, 0) == run(1, 0, 0));
    CHECK(run(1, 0, 0) != run(2, 0, 0));
    CHECK(run(1, 0, 0) != run(1, 1, 0));
    CHECK(run(1, 0, 0) != run(1, 0, 1));

    const auto y = run(9, 4, 0);
    std::size_t kept = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != 0.0) {
            ++kept;
            CHECK(y[i] == doctest::Approx(2.0 * x.values()[i]));
        }
    }
    CHECK(kept > 30);
    CHECK(kept < 98);
}

TEST_CASE("graph mechanics") {
    Rng rng(2);
    const auto a = rand_param(rng, {2, 3});
    const auto b = rand_param(rng, {3, 2});
    const auto loss = sum(matmul(a, b));
    loss.backward();
    CHECK(a.grad().size() == 6);
    CHECK(b.grad().size() == 6);
    // d/da_ij sum(AB) = sum_k b_jk
    CHECK(a.grad()[1] == doctest::Approx(b.values()[2] + b.values()[3]));

    // shared subexpression accumulates both paths
    const auto x = Tensor::parameter({1}, {3.0});
    const auto y = mul(x, x);
    add(y, y).backward();
    CHECK(x.grad()[0] == doctest::Approx(12.0));

    CHECK(test::kind_of([] { Tensor::constant({2}, {1.0, std::numeric_limits<double>::infinity()}); }) ==
          ErrorKind::Numerical);
    const auto huge = Tensor::constant({1, 1}, {1e308});
    CHECK(test::kind_of([&] { scale(huge, 10.0); }) == ErrorKind::Numerical);
    CHECK_THROWS(matmul(a, a));
}

TEST_CASE("positional encoding and pooling") {
    const auto pe = positional_encoding(6, 8);
    CHECK(pe.at(0, 0) == 0.0);
    CHECK(pe.at(0, 1) == 1.0);
    CHECK(pe.at(3, 0) == doctest::Approx(std::sin(3.0)));
    CHECK_FALSE(pe.requires_grad());

    const auto x = Tensor::constant({3, 2}, {1, 2, 3, 4, 100, 200});
    const Mask m = {1, 1, 0};
    const auto p = masked_mean_pool(x, m);
    CHECK(p.at(0, 0) == 2.0);
    CHECK(p.at(0, 1) == 3.0);
    CHECK_THROWS(masked_mean_pool(x, Mask(3, 0)));
    const auto z = mask_rows(x, m);
    CHECK(z.at(2, 0) == 0.0);
    CHECK(z.at(1, 1) == 4.0);
}
