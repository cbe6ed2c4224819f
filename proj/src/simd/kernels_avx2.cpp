// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

// AVX2 + FMA variants. This file is compiled with -mavx2 -mfma; nothing in it
// may run before the dispatcher has confirmed CPU support.

#include <immintrin.h>

#include "kernels_impl.hpp"

namespace ldm3d::simd {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(const double* x, const double* y, size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

void axpy(double a, const double* x, double* y, size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void add(const double* a, const double* b, double* out, size_t n) {
    size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] + b[i];
}

void mul(const double* a, const double* b, double* out, size_t n) {
    size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void scale(double s, const double* x, double* out, size_t n) {
    const __m256d vs = _mm256_set1_pd(s);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_mul_pd(vs, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) out[i] = s * x[i];
}

double sum(const double* x, size_t n) {
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

double sumsq(const double* x, size_t n) { return dot(x, x, n); }

// 4x8 register-blocked micro kernel; edges fall back to row-wise axpy.
void gemm_nn(size_t m, size_t n, size_t k, const double* a, size_t lda, const double* b, size_t ldb, double* c,
             size_t ldc) {
    size_t i = 0;
    const size_t n8 = n - n % 8;
    for (; i + 4 <= m; i += 4) {
        const double* a0 = a + (i + 0) * lda;
        const double* a1 = a + (i + 1) * lda;
        const double* a2 = a + (i + 2) * lda;
        const double* a3 = a + (i + 3) * lda;
        double* c0 = c + (i + 0) * ldc;
        double* c1 = c + (i + 1) * ldc;
        double* c2 = c + (i + 2) * ldc;
        double* c3 = c + (i + 3) * ldc;
        for (size_t j = 0; j < n8; j += 8) {
            __m256d r00 = _mm256_loadu_pd(c0 + j), r01 = _mm256_loadu_pd(c0 + j + 4);
            __m256d r10 = _mm256_loadu_pd(c1 + j), r11 = _mm256_loadu_pd(c1 + j + 4);
            __m256d r20 = _mm256_loadu_pd(c2 + j), r21 = _mm256_loadu_pd(c2 + j + 4);
            __m256d r30 = _mm256_loadu_pd(c3 + j), r31 = _mm256_loadu_pd(c3 + j + 4);
            for (size_t p = 0; p < k; ++p) {
                const double* brow = b + p * ldb + j;
                const __m256d b0 = _mm256_loadu_pd(brow);
                const __m256d b1 = _mm256_loadu_pd(brow + 4);
                __m256d av = _mm256_broadcast_sd(a0 + p);
                r00 = _mm256_fmadd_pd(av, b0, r00);
                r01 = _mm256_fmadd_pd(av, b1, r01);
                av = _mm256_broadcast_sd(a1 + p);
                r10 = _mm256_fmadd_pd(av, b0, r10);
                r11 = _mm256_fmadd_pd(av, b1, r11);
                av = _mm256_broadcast_sd(a2 + p);
                r20 = _mm256_fmadd_pd(av, b0, r20);
                r21 = _mm256_fmadd_pd(av, b1, r21);
                av = _mm256_broadcast_sd(a3 + p);
                r30 = _mm256_fmadd_pd(av, b0, r30);
                r31 = _mm256_fmadd_pd(av, b1, r31);
            }
            _mm256_storeu_pd(c0 + j, r00), _mm256_storeu_pd(c0 + j + 4, r01);
            _mm256_storeu_pd(c1 + j, r10), _mm256_storeu_pd(c1 + j + 4, r11);
            _mm256_storeu_pd(c2 + j, r20), _mm256_storeu_pd(c2 + j + 4, r21);
            _mm256_storeu_pd(c3 + j, r30), _mm256_storeu_pd(c3 + j + 4, r31);
        }
        if (n8 < n) {
            for (size_t r = 0; r < 4; ++r) {
                const double* ar = a + (i + r) * lda;
                double* cr = c + (i + r) * ldc;
                for (size_t p = 0; p < k; ++p) {
                    const double av = ar[p];
                    const double* brow = b + p * ldb;
                    for (size_t j = n8; j < n; ++j) cr[j] += av * brow[j];
                }
            }
        }
    }
    for (; i < m; ++i) {
        double* crow = c + i * ldc;
        for (size_t p = 0; p < k; ++p) axpy(a[i * lda + p], b + p * ldb, crow, n);
    }
}

void gemm_nt(size_t m, size_t n, size_t k, const double* a, size_t lda, const double* b, size_t ldb, double* c,
             size_t ldc) {
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < n; ++j) c[i * ldc + j] += dot(a + i * lda, b + j * ldb, k);
}

void gemm_tn(size_t m, size_t n, size_t k, const double* a, size_t lda, const double* b, size_t ldb, double* c,
             size_t ldc) {
    for (size_t p = 0; p < k; ++p) {
        const double* brow = b + p * ldb;
        for (size_t i = 0; i < m; ++i) {
            const double av = a[p * lda + i];
            if (av != 0.0) axpy(av, brow, c + i * ldc, n);
        }
    }
}

}  // namespace

const KernelTable* detail::avx2_table() {
    static const KernelTable table{Isa::Avx2, dot, axpy, add, mul, scale, sum, sumsq, gemm_nn, gemm_nt, gemm_tn};
    return &table;
}

}  // namespace ldm3d::simd
