// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

// NEON (AArch64) variants. Only built on aarch64 targets.

#include <arm_neon.h>

#include "kernels_impl.hpp"

namespace ldm3d::simd {
namespace {

double dot(const double* x, const double* y, size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0), acc1 = vdupq_n_f64(0.0);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
    }
    double s = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

void axpy(double a, const double* x, double* y, size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void add(const double* a, const double* b, double* out, size_t n) {
    size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    for (; i < n; ++i) out[i] = a[i] + b[i];
}

void mul(const double* a, const double* b, double* out, size_t n) {
    size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void scale(double s, const double* x, double* out, size_t n) {
    size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmulq_n_f64(vld1q_f64(x + i), s));
    for (; i < n; ++i) out[i] = s * x[i];
}

double sum(const double* x, size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

double sumsq(const double* x, size_t n) { return dot(x, x, n); }

void gemm_nn(size_t m, size_t n, size_t k, const double* a, size_t lda, const double* b, size_t ldb, double* c,
             size_t ldc) {
    for (size_t i = 0; i < m; ++i)
        for (size_t p = 0; p < k; ++p) axpy(a[i * lda + p], b + p * ldb, c + i * ldc, n);
}

void gemm_nt(size_t m, size_t n, size_t k, const double* a, size_t lda, const double* b, size_t ldb, double* c,
             size_t ldc) {
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < n; ++j) c[i * ldc + j] += dot(a + i * lda, b + j * ldb, k);
}

void gemm_tn(size_t m, size_t n, size_t k, const double* a, size_t lda, const double* b, size_t ldb, double* c,
             size_t ldc) {
    for (size_t p = 0; p < k; ++p)
        for (size_t i = 0; i < m; ++i) axpy(a[p * lda + i], b + p * ldb, c + i * ldc, n);
}

}  // namespace

const KernelTable* detail::neon_table() {
    static const KernelTable table{Isa::Neon, dot, axpy, add, mul, scale, sum, sumsq, gemm_nn, gemm_nt, gemm_tn};
    return &table;
}

}  // namespace ldm3d::simd
