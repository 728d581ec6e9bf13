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

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "eri/simd/kernels.hpp"

namespace eri::simd {
namespace {

std::atomic<const KernelTable*> g_active{nullptr};

const KernelTable* pick_default() {
    const char* env = std::getenv("ERI_SIMD");
    if (env != nullptr && std::string(env) == "scalar") return &scalar_kernels();
    if (cpu_supports(Isa::Avx2)) return avx2_kernels();
    return &scalar_kernels();
}

} // namespace

bool cpu_supports(Isa isa) {
    switch (isa) {
    case Isa::Scalar:
        return true;
    case Isa::Avx2:
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
        return avx2_kernels() != nullptr && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
        return false;
#endif
    }
    return false;
}

std::vector<Isa> available_isas() {
    std::vector<Isa> out{Isa::Scalar};
    if (cpu_supports(Isa::Avx2)) out.push_back(Isa::Avx2);
    return out;
}

const KernelTable& kernels_for(Isa isa) {
    if (!cpu_supports(isa)) throw std::runtime_error("simd: ISA not available: " + std::string(isa_name(isa)));
    return isa == Isa::Avx2 ? *avx2_kernels() : scalar_kernels();
}

const KernelTable& active() {
    const KernelTable* t = g_active.load(std::memory_order_acquire);
    if (t == nullptr) {
        const KernelTable* chosen = pick_default();
        g_active.compare_exchange_strong(t, chosen, std::memory_order_acq_rel);
        t = g_active.load(std::memory_order_acquire);
    }
    return *t;
}

void set_active(Isa isa) { g_active.store(&kernels_for(isa), std::memory_order_release); }

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c) {
    const KernelTable& kt = active();
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        const double* arow = a + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            if (arow[p] != 0.0) kt.axpy(arow[p], b + p * n, crow, n);
        }
    }
}

void gemm_nt(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c) {
    const KernelTable& kt = active();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) c[i * n + j] += kt.dot(a + i * k, b + j * k, k);
    }
}

void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c) {
    const KernelTable& kt = active();
    for (std::size_t p = 0; p < k; ++p) {
        const double* arow = a + p * m;
        const double* brow = b + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            if (arow[i] != 0.0) kt.axpy(arow[i], brow, c + i * n, n);
        }
    }
}

} // namespace eri::simd
