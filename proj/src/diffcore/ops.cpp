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

#include "eri/diffcore/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "eri/common/error.hpp"
#include "eri/common/rng.hpp"
#include "eri/simd/kernels.hpp"

namespace eri::diff {
namespace {

void need(bool cond, const std::string& what) { require(cond, ErrorKind::Validation, what); }

void same_shape(const Tensor& a, const Tensor& b, const char* op) {
    need(a.shape() == b.shape(),
         std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

void check_mask(std::span<const std::uint8_t> mask, std::size_t rows, const char* op) {
    need(mask.size() == rows, std::string(op) + ": mask length " + std::to_string(mask.size()) +
                                  " does not match " + std::to_string(rows) + " rows");
}

template <class F>
Tensor unary(const char* op, const Tensor& x, F&& f_and_df) {
    const auto xv = x.values();
    std::vector<double> out(xv.size());
    std::vector<double> deriv(x.requires_grad() ? xv.size() : 0);
    for (std::size_t i = 0; i < xv.size(); ++i) {
        auto [y, dy] = f_and_df(xv[i]);
        out[i] = y;
        if (!deriv.empty()) deriv[i] = dy;
    }
    return Tensor::from_op(op, x.shape(), std::move(out), {x}, [x, deriv = std::move(deriv)](std::span<const double> g) {
        auto gx = x.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * deriv[i];
    });
}

} // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    need(a.rank() == 2 && b.rank() == 2, "matmul: operands must be 2-D");
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    need(b.rows() == k, "matmul: inner dimension mismatch " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
    std::vector<double> out(m * n, 0.0);
    simd::gemm_nn(m, k, n, a.values().data(), b.values().data(), out.data());
    return Tensor::from_op("matmul", {m, n}, std::move(out), {a, b}, [a, b, m, k, n](std::span<const double> g) {
        if (a.requires_grad()) simd::gemm_nt(m, n, k, g.data(), b.values().data(), a.grad_buffer().data());
        if (b.requires_grad()) simd::gemm_tn(k, m, n, a.values().data(), g.data(), b.grad_buffer().data());
    });
}

Tensor add(const Tensor& a, const Tensor& b) {
    same_shape(a, b, "add");
    std::vector<double> out(a.values().begin(), a.values().end());
    simd::active().axpy(1.0, b.values().data(), out.data(), out.size());
    return Tensor::from_op("add", a.shape(), std::move(out), {a, b}, [a, b](std::span<const double> g) {
        const auto& kt = simd::active();
        if (a.requires_grad()) kt.axpy(1.0, g.data(), a.grad_buffer().data(), g.size());
        if (b.requires_grad()) kt.axpy(1.0, g.data(), b.grad_buffer().data(), g.size());
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    same_shape(a, b, "sub");
    std::vector<double> out(a.values().begin(), a.values().end());
    simd::active().axpy(-1.0, b.values().data(), out.data(), out.size());
    return Tensor::from_op("sub", a.shape(), std::move(out), {a, b}, [a, b](std::span<const double> g) {
        const auto& kt = simd::active();
        if (a.requires_grad()) kt.axpy(1.0, g.data(), a.grad_buffer().data(), g.size());
        if (b.requires_grad()) kt.axpy(-1.0, g.data(), b.grad_buffer().data(), g.size());
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    same_shape(a, b, "mul");
    const auto av = a.values(), bv = b.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
    return Tensor::from_op("mul", a.shape(), std::move(out), {a, b}, [a, b](std::span<const double> g) {
        const auto av = a.values(), bv = b.values();
        if (a.requires_grad()) {
            auto ga = a.grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
        }
        if (b.requires_grad()) {
            auto gb = b.grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
        }
    });
}

Tensor scale(const Tensor& a, double s) {
    std::vector<double> out(a.values().begin(), a.values().end());
    simd::active().scal(s, out.data(), out.size());
    return Tensor::from_op("scale", a.shape(), std::move(out), {a}, [a, s](std::span<const double> g) {
        simd::active().axpy(s, g.data(), a.grad_buffer().data(), g.size());
    });
}

Tensor add_bias(const Tensor& x, const Tensor& b) {
    const std::size_t m = x.rows(), n = x.cols();
    need(b.size() == n, "add_bias: bias has " + std::to_string(b.size()) + " entries, expected " + std::to_string(n));
    std::vector<double> out(x.values().begin(), x.values().end());
    const auto& kt = simd::active();
    for (std::size_t i = 0; i < m; ++i) kt.axpy(1.0, b.values().data(), out.data() + i * n, n);
    return Tensor::from_op("add_bias", x.shape(), std::move(out), {x, b}, [x, b, m, n](std::span<const double> g) {
        const auto& kt = simd::active();
        if (x.requires_grad()) kt.axpy(1.0, g.data(), x.grad_buffer().data(), g.size());
        if (b.requires_grad()) {
            double* gb = b.grad_buffer().data();
            for (std::size_t i = 0; i < m; ++i) kt.axpy(1.0, g.data() + i * n, gb, n);
        }
    });
}

Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b) { return add_bias(matmul(x, w), b); }

Tensor relu(const Tensor& x) {
    return unary("relu", x, [](double v) { return std::pair{v > 0.0 ? v : 0.0, v > 0.0 ? 1.0 : 0.0}; });
}

Tensor gelu(const Tensor& x) {
    return unary("gelu", x, [](double v) {
        const double cdf = 0.5 * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0));
        const double pdf = std::exp(-0.5 * v * v) / std::sqrt(2.0 * std::numbers::pi);
        return std::pair{v * cdf, cdf + v * pdf};
    });
}

Tensor sigmoid(const Tensor& x) {
    return unary("sigmoid", x, [](double v) {
        const double s = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
        return std::pair{s, s * (1.0 - s)};
    });
}

Tensor softmax(const Tensor& x) {
    const std::size_t m = x.rows(), n = x.cols();
    const auto xv = x.values();
    std::vector<double> out(xv.size());
    for (std::size_t i = 0; i < m; ++i) {
        const double* r = xv.data() + i * n;
        double* o = out.data() + i * n;
        const double mx = *std::max_element(r, r + n);
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += (o[j] = std::exp(r[j] - mx));
        for (std::size_t j = 0; j < n; ++j) o[j] /= s;
    }
    auto y = std::make_shared<std::vector<double>>(out);
    return Tensor::from_op("softmax", x.shape(), std::move(out), {x}, [x, y, m, n](std::span<const double> g) {
        auto gx = x.grad_buffer();
        for (std::size_t i = 0; i < m; ++i) {
            const double* yr = y->data() + i * n;
            const double* gr = g.data() + i * n;
            double d = 0.0;
            for (std::size_t j = 0; j < n; ++j) d += gr[j] * yr[j];
            for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += yr[j] * (gr[j] - d);
        }
    });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
    const std::size_t m = x.rows(), n = x.cols();
    need(gamma.size() == n && beta.size() == n, "layer_norm: gamma/beta must have " + std::to_string(n) + " entries");
    need(eps > 0.0, "layer_norm: eps must be positive");
    const auto xv = x.values(), gv = gamma.values(), bv = beta.values();
    std::vector<double> out(xv.size());
    auto xhat = std::make_shared<std::vector<double>>(xv.size());
    auto inv_std = std::make_shared<std::vector<double>>(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double* r = xv.data() + i * n;
        // shift by the first element so constant rows centre to exactly zero
        const double shift = r[0];
        double mean = 0.0;
        for (std::size_t j = 0; j < n; ++j) mean += r[j] - shift;
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double c = (r[j] - shift) - mean;
            var += c * c;
        }
        var /= static_cast<double>(n);
        const double inv = 1.0 / std::sqrt(var + eps);
        (*inv_std)[i] = inv;
        for (std::size_t j = 0; j < n; ++j) {
            const double h = ((r[j] - shift) - mean) * inv;
            (*xhat)[i * n + j] = h;
            out[i * n + j] = gv[j] * h + bv[j];
        }
    }
    return Tensor::from_op("layer_norm", x.shape(), std::move(out), {x, gamma, beta},
                           [x, gamma, beta, xhat, inv_std, m, n](std::span<const double> g) {
                               const auto gv = gamma.values();
                               if (gamma.requires_grad() || beta.requires_grad()) {
                                   for (std::size_t i = 0; i < m; ++i) {
                                       for (std::size_t j = 0; j < n; ++j) {
                                           if (gamma.requires_grad())
                                               gamma.grad_buffer()[j] += g[i * n + j] * (*xhat)[i * n + j];
                                           if (beta.requires_grad()) beta.grad_buffer()[j] += g[i * n + j];
                                       }
                                   }
                               }
                               if (!x.requires_grad()) return;
                               auto gx = x.grad_buffer();
                               std::vector<double> dh(n);
                               for (std::size_t i = 0; i < m; ++i) {
                                   double mean_dh = 0.0, mean_dh_h = 0.0;
                                   for (std::size_t j = 0; j < n; ++j) {
                                       dh[j] = g[i * n + j] * gv[j];
                                       mean_dh += dh[j];
                                       mean_dh_h += dh[j] * (*xhat)[i * n + j];
                                   }
                                   mean_dh /= static_cast<double>(n);
                                   mean_dh_h /= static_cast<double>(n);
                                   for (std::size_t j = 0; j < n; ++j) {
                                       gx[i * n + j] +=
                                           (*inv_std)[i] * (dh[j] - mean_dh - (*xhat)[i * n + j] * mean_dh_h);
                                   }
                               }
                           });
}

Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b) {
    need(x.rank() == 2, "conv1d: input must be T x D");
    need(w.rank() == 3, "conv1d: kernel must be K x D x C");
    const std::size_t frames = x.rows(), in = x.cols();
    const std::size_t k = w.shape()[0], wd = w.shape()[1], out_ch = w.shape()[2];
    need(k % 2 == 1, "conv1d: kernel size must be odd, got " + std::to_string(k));
    need(wd == in, "conv1d: kernel expects " + std::to_string(wd) + " input channels, input has " + std::to_string(in));
    need(b.size() == out_ch, "conv1d: bias must have " + std::to_string(out_ch) + " entries");
    const std::size_t half = k / 2;
    const auto& kt = simd::active();
    const auto xv = x.values(), wv = w.values();
    std::vector<double> out(frames * out_ch);
    for (std::size_t t = 0; t < frames; ++t) std::copy_n(b.values().data(), out_ch, out.data() + t * out_ch);
    for (std::size_t tap = 0; tap < k; ++tap) {
        const double* wk = wv.data() + tap * in * out_ch;
        for (std::size_t t = 0; t < frames; ++t) {
            const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + tap) - static_cast<std::ptrdiff_t>(half);
            if (src < 0 || src >= static_cast<std::ptrdiff_t>(frames)) continue;
            const double* xr = xv.data() + static_cast<std::size_t>(src) * in;
            double* orow = out.data() + t * out_ch;
            for (std::size_t d = 0; d < in; ++d) {
                if (xr[d] != 0.0) kt.axpy(xr[d], wk + d * out_ch, orow, out_ch);
            }
        }
    }
    return Tensor::from_op(
        "conv1d", {frames, out_ch}, std::move(out), {x, w, b},
        [x, w, b, frames, in, k, out_ch, half](std::span<const double> g) {
            const auto& kt = simd::active();
            if (b.requires_grad()) {
                double* gb = b.grad_buffer().data();
                for (std::size_t t = 0; t < frames; ++t) kt.axpy(1.0, g.data() + t * out_ch, gb, out_ch);
            }
            const auto xv = x.values(), wv = w.values();
            double* gx = x.requires_grad() ? x.grad_buffer().data() : nullptr;
            double* gw = w.requires_grad() ? w.grad_buffer().data() : nullptr;
            for (std::size_t tap = 0; tap < k; ++tap) {
                const double* wk = wv.data() + tap * in * out_ch;
                for (std::size_t t = 0; t < frames; ++t) {
                    const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + tap) - static_cast<std::ptrdiff_t>(half);
                    if (src < 0 || src >= static_cast<std::ptrdiff_t>(frames)) continue;
                    const auto s = static_cast<std::size_t>(src);
                    const double* grow = g.data() + t * out_ch;
                    for (std::size_t d = 0; d < in; ++d) {
                        if (gx) gx[s * in + d] += kt.dot(grow, wk + d * out_ch, out_ch);
                        if (gw) kt.axpy(xv[s * in + d], grow, gw + (tap * in + d) * out_ch, out_ch);
                    }
                }
            }
        });
}

namespace {

struct HeadGeometry {
    std::size_t tq, tk, dim, heads, dh;
};

// Softmax weights of one head into p (tq x tk); masked keys stay exactly 0.
void head_weights(const HeadGeometry& geo, std::size_t h, const double* q, const double* k,
                  std::span<const std::uint8_t> mask, double* p) {
    const auto& kt = simd::active();
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(geo.dh));
    for (std::size_t i = 0; i < geo.tq; ++i) {
        double* pr = p + i * geo.tk;
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < geo.tk; ++j) {
            if (!mask[j]) {
                pr[j] = 0.0;
                continue;
            }
            pr[j] = kt.dot(q + i * geo.dim + h * geo.dh, k + j * geo.dim + h * geo.dh, geo.dh) * inv_sqrt;
            mx = std::max(mx, pr[j]);
        }
        double s = 0.0;
        for (std::size_t j = 0; j < geo.tk; ++j) {
            if (mask[j]) s += (pr[j] = std::exp(pr[j] - mx));
        }
        for (std::size_t j = 0; j < geo.tk; ++j) {
            if (mask[j]) pr[j] /= s;
        }
    }
}

HeadGeometry attention_geometry(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t heads,
                                std::span<const std::uint8_t> key_mask) {
    need(q.rank() == 2 && k.rank() == 2 && v.rank() == 2, "attention: q, k, v must be 2-D");
    need(heads >= 1, "attention: heads must be >= 1");
    const std::size_t dim = q.cols();
    need(k.cols() == dim && v.cols() == dim, "attention: q, k, v must share the model dimension");
    need(dim % heads == 0,
         "attention: model dimension " + std::to_string(dim) + " not divisible by heads " + std::to_string(heads));
    need(k.rows() == v.rows(), "attention: k and v must have the same number of positions");
    check_mask(key_mask, k.rows(), "attention");
    need(std::any_of(key_mask.begin(), key_mask.end(), [](auto m) { return m != 0; }),
         "attention: every key position is masked");
    return {q.rows(), k.rows(), dim, heads, dim / heads};
}

} // namespace

std::vector<double> attention_weights(const Tensor& q, const Tensor& k, std::size_t heads, std::size_t head,
                                      std::span<const std::uint8_t> key_mask) {
    const HeadGeometry geo = attention_geometry(q, k, k, heads, key_mask);
    need(head < heads, "attention_weights: head index out of range");
    std::vector<double> p(geo.tq * geo.tk);
    head_weights(geo, head, q.values().data(), k.values().data(), key_mask, p.data());
    return p;
}

Tensor multi_head_attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t heads,
                            std::span<const std::uint8_t> key_mask) {
    const HeadGeometry geo = attention_geometry(q, k, v, heads, key_mask);
    const auto& kt = simd::active();
    auto probs = std::make_shared<std::vector<double>>(geo.heads * geo.tq * geo.tk);
    auto mask = std::make_shared<Mask>(key_mask.begin(), key_mask.end());
    std::vector<double> out(geo.tq * geo.dim, 0.0);
    const double* vv = v.values().data();
    for (std::size_t h = 0; h < geo.heads; ++h) {
        double* p = probs->data() + h * geo.tq * geo.tk;
        head_weights(geo, h, q.values().data(), k.values().data(), *mask, p);
        for (std::size_t i = 0; i < geo.tq; ++i) {
            for (std::size_t j = 0; j < geo.tk; ++j) {
                if (p[i * geo.tk + j] != 0.0)
                    kt.axpy(p[i * geo.tk + j], vv + j * geo.dim + h * geo.dh, out.data() + i * geo.dim + h * geo.dh,
                            geo.dh);
            }
        }
    }
    return Tensor::from_op(
        "multi_head_attention", {geo.tq, geo.dim}, std::move(out), {q, k, v},
        [q, k, v, geo, probs, mask](std::span<const double> g) {
            const auto& kt = simd::active();
            const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(geo.dh));
            const double* qv = q.values().data();
            const double* kv = k.values().data();
            const double* vv = v.values().data();
            double* gq = q.requires_grad() ? q.grad_buffer().data() : nullptr;
            double* gk = k.requires_grad() ? k.grad_buffer().data() : nullptr;
            double* gv = v.requires_grad() ? v.grad_buffer().data() : nullptr;
            std::vector<double> dp(geo.tk);
            for (std::size_t h = 0; h < geo.heads; ++h) {
                const double* p = probs->data() + h * geo.tq * geo.tk;
                const std::size_t off = h * geo.dh;
                for (std::size_t i = 0; i < geo.tq; ++i) {
                    const double* gi = g.data() + i * geo.dim + off;
                    const double* pi = p + i * geo.tk;
                    double row_dot = 0.0;
                    for (std::size_t j = 0; j < geo.tk; ++j) {
                        if (!(*mask)[j]) {
                            dp[j] = 0.0;
                            continue;
                        }
                        if (gv) kt.axpy(pi[j], gi, gv + j * geo.dim + off, geo.dh);
                        dp[j] = kt.dot(gi, vv + j * geo.dim + off, geo.dh);
                        row_dot += dp[j] * pi[j];
                    }
                    for (std::size_t j = 0; j < geo.tk; ++j) {
                        if (!(*mask)[j]) continue;
                        const double ds = pi[j] * (dp[j] - row_dot) * inv_sqrt;
                        if (ds == 0.0) continue;
                        if (gq) kt.axpy(ds, kv + j * geo.dim + off, gq + i * geo.dim + off, geo.dh);
                        if (gk) kt.axpy(ds, qv + i * geo.dim + off, gk + j * geo.dim + off, geo.dh);
                    }
                }
            }
        });
}

Tensor positional_encoding(std::size_t frames, std::size_t dim) {
    std::vector<double> pe(frames * dim);
    for (std::size_t t = 0; t < frames; ++t) {
        for (std::size_t i = 0; i < dim; ++i) {
            const double rate = std::pow(10000.0, -static_cast<double>(i - i % 2) / static_cast<double>(dim));
            const double a = static_cast<double>(t) * rate;
            pe[t * dim + i] = (i % 2 == 0) ? std::sin(a) : std::cos(a);
        }
    }
    return Tensor::constant({frames, dim}, std::move(pe));
}

Tensor dropout(const Tensor& x, double p, DropoutContext& ctx) {
    need(p >= 0.0 && p < 1.0, "dropout: rate must lie in [0,1)");
    const std::uint64_t instance = ctx.next_instance++;
    if (!ctx.train || p == 0.0) return x;
    const std::uint64_t base = hash_combine(hash_combine(ctx.seed, instance), ctx.step);
    const double keep_scale = 1.0 / (1.0 - p);
    std::vector<double> factor(x.size());
    for (std::size_t i = 0; i < factor.size(); ++i) {
        const double u = static_cast<double>(mix64(base + i) >> 11) * 0x1.0p-53;
        factor[i] = u < p ? 0.0 : keep_scale;
    }
    std::vector<double> out(x.size());
    const auto xv = x.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * factor[i];
    return Tensor::from_op("dropout", x.shape(), std::move(out), {x}, [x, factor = std::move(factor)](std::span<const double> g) {
        auto gx = x.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * factor[i];
    });
}

Tensor masked_mean_pool(const Tensor& x, std::span<const std::uint8_t> mask) {
    const std::size_t m = x.rows(), n = x.cols();
    check_mask(mask, m, "masked_mean_pool");
    std::size_t valid = 0;
    for (auto v : mask) valid += v ? 1 : 0;
    need(valid > 0, "masked_mean_pool: every frame is masked");
    const double w = 1.0 / static_cast<double>(valid);
    const auto& kt = simd::active();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        if (mask[i]) kt.axpy(1.0, x.values().data() + i * n, out.data(), n);
    }
    kt.scal(w, out.data(), n);
    auto keep = std::make_shared<Mask>(mask.begin(), mask.end());
    return Tensor::from_op("masked_mean_pool", {1, n}, std::move(out), {x}, [x, keep, w, m, n](std::span<const double> g) {
        const auto& kt = simd::active();
        double* gx = x.grad_buffer().data();
        for (std::size_t i = 0; i < m; ++i) {
            if ((*keep)[i]) kt.axpy(w, g.data(), gx + i * n, n);
        }
    });
}

Tensor mask_rows(const Tensor& x, std::span<const std::uint8_t> mask) {
    const std::size_t m = x.rows(), n = x.cols();
    check_mask(mask, m, "mask_rows");
    std::vector<double> out(x.values().begin(), x.values().end());
    for (std::size_t i = 0; i < m; ++i) {
        if (!mask[i]) std::fill_n(out.data() + i * n, n, 0.0);
    }
    auto keep = std::make_shared<Mask>(mask.begin(), mask.end());
    return Tensor::from_op("mask_rows", x.shape(), std::move(out), {x}, [x, keep, m, n](std::span<const double> g) {
        const auto& kt = simd::active();
        double* gx = x.grad_buffer().data();
        for (std::size_t i = 0; i < m; ++i) {
            if ((*keep)[i]) kt.axpy(1.0, g.data() + i * n, gx + i * n, n);
        }
    });
}

Tensor concat_cols(std::span<const Tensor> parts) {
    need(!parts.empty(), "concat_cols: no inputs");
    const std::size_t m = parts[0].rows();
    std::size_t n = 0;
    for (const auto& p : parts) {
        need(p.rows() == m, "concat_cols: row count mismatch");
        n += p.cols();
    }
    std::vector<double> out(m * n);
    std::size_t off = 0;
    for (const auto& p : parts) {
        for (std::size_t i = 0; i < m; ++i) std::copy_n(p.values().data() + i * p.cols(), p.cols(), out.data() + i * n + off);
        off += p.cols();
    }
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    return Tensor::from_op("concat_cols", {m, n}, std::move(out), inputs, [inputs, m, n](std::span<const double> g) {
        std::size_t off = 0;
        for (const auto& p : inputs) {
            if (p.requires_grad()) {
                auto gp = p.grad_buffer();
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < p.cols(); ++j) gp[i * p.cols() + j] += g[i * n + off + j];
            }
            off += p.cols();
        }
    });
}

Tensor concat_rows(std::span<const Tensor> parts) {
    need(!parts.empty(), "concat_rows: no inputs");
    const std::size_t n = parts[0].cols();
    std::size_t m = 0;
    for (const auto& p : parts) {
        need(p.cols() == n, "concat_rows: column count mismatch");
        m += p.rows();
    }
    std::vector<double> out;
    out.reserve(m * n);
    for (const auto& p : parts) out.insert(out.end(), p.values().begin(), p.values().end());
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    return Tensor::from_op("concat_rows", {m, n}, std::move(out), inputs, [inputs](std::span<const double> g) {
        std::size_t off = 0;
        for (const auto& p : inputs) {
            if (p.requires_grad()) simd::active().axpy(1.0, g.data() + off, p.grad_buffer().data(), p.size());
            off += p.size();
        }
    });
}

Tensor sum(const Tensor& x) {
    double s = 0.0;
    for (double v : x.values()) s += v;
    return Tensor::from_op("sum", {1}, {s}, {x}, [x](std::span<const double> g) {
        for (auto& gx : x.grad_buffer()) gx += g[0];
    });
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.size())); }

Tensor dot_const(const Tensor& x, std::span<const double> w) {
    need(w.size() == x.size(), "dot_const: weight count mismatch");
    auto weights = std::make_shared<std::vector<double>>(w.begin(), w.end());
    const double s = simd::active().dot(x.values().data(), weights->data(), x.size());
    return Tensor::from_op("dot_const", {1}, {s}, {x}, [x, weights](std::span<const double> g) {
        simd::active().axpy(g[0], weights->data(), x.grad_buffer().data(), x.size());
    });
}

} // namespace eri::diff
