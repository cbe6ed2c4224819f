// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace ldm3d::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

// Inner-loop kernels used by the tensor ops. Every table entry has the same
// contract across ISAs; only the summation order (and therefore the last few
// ulps) may differ. Matrices are row-major with explicit leading dimensions.
struct KernelTable {
    Isa isa;

    double (*dot)(const double* x, const double* y, size_t n);
    // y += a * x
    void (*axpy)(double a, const double* x, double* y, size_t n);
    // out = a + b, out = a * b, out = s * x; out may alias an input.
    void (*add)(const double* a, const double* b, double* out, size_t n);
    void (*mul)(const double* a, const double* b, double* out, size_t n);
    void (*scale)(double s, const double* x, double* out, size_t n);
    double (*sum)(const double* x, size_t n);
    double (*sumsq)(const double* x, size_t n);

    // C[MxN] += A[MxK] * B[KxN]
    void (*gemm_nn)(size_t m, size_t n, size_t k, const double* a, size_t lda, const double* b, size_t ldb,
                    double* c, size_t ldc);
    // C[MxN] += A[MxK] * B[NxK]^T
    void (*gemm_nt)(size_t m, size_t n, size_t k, const double* a, size_t lda, const double* b, size_t ldb,
                    double* c, size_t ldc);
    // C[MxN] += A[KxM]^T * B[KxN]
    void (*gemm_tn)(size_t m, size_t n, size_t k, const double* a, size_t lda, const double* b, size_t ldb,
                    double* c, size_t ldc);
};

const KernelTable& scalar_kernels();
// nullptr when the variant is not compiled in or the CPU lacks the feature.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

// Every variant usable on this machine, scalar first.
std::vector<const KernelTable*> available_kernels();

// Active table. Chosen once at startup: the LDM3D_SIMD environment variable
// ("scalar", "avx2", "neon") wins, otherwise the widest supported ISA.
const KernelTable& kernels();
void set_active(Isa isa);

}  // namespace ldm3d::simd
