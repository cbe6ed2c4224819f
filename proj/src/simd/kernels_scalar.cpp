// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

// Reference kernels. These define the semantics the vector variants are
// checked against.

#include "kernels_impl.hpp"

namespace ldm3d::simd {
namespace {

double dot(const double* x, const double* y, size_t n) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

void axpy(double a, const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void add(const double* a, const double* b, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void mul(const double* a, const double* b, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void scale(double s, const double* x, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = s * x[i];
}

double sum(const double* x, size_t n) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += x[i];
    return s;
}

double sumsq(const double* x, size_t n) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += x[i] * x[i];
    return s;
}

void gemm_nn(size_t m, size_t n, size_t k, const double* a, size_t lda, const double* b, size_t ldb, double* c,
             size_t ldc) {
    for (size_t i = 0; i < m; ++i) {
        double* crow = c + i * ldc;
        for (size_t p = 0; p < k; ++p) {
            const double av = a[i * lda + p];
            if (av == 0.0) continue;
            const double* brow = b + p * ldb;
            for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
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
            if (av == 0.0) continue;
            double* crow = c + i * ldc;
            for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{Isa::Scalar, dot, axpy, add, mul, scale, sum, sumsq, gemm_nn, gemm_nt, gemm_tn};
    return table;
}

}  // namespace ldm3d::simd
