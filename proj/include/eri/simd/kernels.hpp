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

// Data-parallel inner loops used by the compute graph. Every kernel has a
// portable scalar reference and, on x86-64, an AVX2+FMA variant. The variant is
// chosen once at startup from CPUID; ERI_SIMD=scalar forces the reference path.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace eri::simd {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
    Isa isa;
    const char* name;
    /// sum_i x[i] * y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    /// y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    /// x *= alpha
    void (*scal)(double alpha, double* x, std::size_t n);
    void (*widen)(const float* src, double* dst, std::size_t n);
    /// Round-to-nearest, identical to static_cast<float>.
    void (*narrow)(const double* src, float* dst, std::size_t n);
};

const KernelTable& scalar_kernels();
/// nullptr when the build or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels();

bool cpu_supports(Isa isa);
std::vector<Isa> available_isas();
const KernelTable& kernels_for(Isa isa);

/// The process-wide table. Selected lazily on first use.
const KernelTable& active();
/// Testing hook; throws if the ISA is unavailable.
void set_active(Isa isa);
std::string_view isa_name(Isa isa);

// Row-major dense products built on the active table. All accumulate into C.

/// C[m,n] += A[m,k] * B[k,n]
void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c);
/// C[m,n] += A[m,k] * B[n,k]^T
void gemm_nt(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c);
/// C[m,n] += A[k,m]^T * B[k,n]
void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c);

} // namespace eri::simd
