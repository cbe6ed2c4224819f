// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <vector>

#include "doctest.h"
#include "ldm3d/core/rng.hpp"
#include "ldm3d/nn/ops.hpp"
#include "ldm3d/simd/kernels.hpp"
#include "support.hpp"

using namespace ldm3d;
using simd::KernelTable;

namespace {

std::vector<double> rand_vec(size_t n, uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-1, 1);
    return v;
}

double max_rel(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
    return m;
}

struct IsaRestore {
    simd::Isa saved = simd::kernels().isa;
    ~IsaRestore() { simd::set_active(saved); }
};

}  // namespace

TEST_CASE("every kernel variant matches the scalar reference") {
    const KernelTable& ref = simd::scalar_kernels();
    const auto tables = simd::available_kernels();
    REQUIRE(!tables.empty());
    CHECK(tables.front()->isa == simd::Isa::Scalar);
    MESSAGE("active ISA: " << simd::isa_name(simd::kernels().isa) << ", variants: " << tables.size());

    for (const KernelTable* k : tables) {
        CAPTURE(simd::isa_name(k->isa));
        for (size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 15u, 16u, 33u, 1001u}) {
            CAPTURE(n);
            const auto x = rand_vec(n, 1 + n), y = rand_vec(n, 2 + n);
            CHECK(std::abs(k->dot(x.data(), y.data(), n) - ref.dot(x.data(), y.data(), n)) <= 1e-12 * (1 + n));
            CHECK(std::abs(k->sum(x.data(), n) - ref.sum(x.data(), n)) <= 1e-12 * (1 + n));
            CHECK(std::abs(k->sumsq(x.data(), n) - ref.sumsq(x.data(), n)) <= 1e-12 * (1 + n));

            auto y1 = y, y2 = y;
            k->axpy(0.37, x.data(), y1.data(), n);
            ref.axpy(0.37, x.data(), y2.data(), n);
            CHECK(max_rel(y1, y2) <= 1e-15);

            std::vector<double> o1(n), o2(n);
            k->add(x.data(), y.data(), o1.data(), n);
            ref.add(x.data(), y.data(), o2.data(), n);
            CHECK(o1 == o2);
            k->mul(x.data(), y.data(), o1.data(), n);
            ref.mul(x.data(), y.data(), o2.data(), n);
            CHECK(o1 == o2);
            k->scale(-1.25, x.data(), o1.data(), n);
            ref.scale(-1.25, x.data(), o2.data(), n);
            CHECK(o1 == o2);
        }
    }
}

TEST_CASE("gemm variants match the scalar reference on ragged shapes") {
    const KernelTable& ref = simd::scalar_kernels();
    for (const KernelTable* k : simd::available_kernels()) {
        CAPTURE(simd::isa_name(k->isa));
        for (auto [m, n, kk] : std::vector<std::array<size_t, 3>>{{1, 1, 1}, {3, 5, 7}, {4, 8, 16}, {9, 17, 5}, {13, 31, 29}}) {
            CAPTURE(m);
            CAPTURE(n);
            CAPTURE(kk);
            // Padded leading dimensions exercise the stride handling.
            const size_t lda = kk + 2, ldb = n + 3, ldc = n + 1;
            const auto a = rand_vec(m * lda, 10), b = rand_vec(kk * ldb, 11), c0 = rand_vec(m * ldc, 12);
            auto c1 = c0, c2 = c0;
            k->gemm_nn(m, n, kk, a.data(), lda, b.data(), ldb, c1.data(), ldc);
            ref.gemm_nn(m, n, kk, a.data(), lda, b.data(), ldb, c2.data(), ldc);
            CHECK(max_rel(c1, c2) <= 1e-13);

            const size_t ldbt = kk + 1;
            const auto bt = rand_vec(n * ldbt, 13);
            c1 = c0;
            c2 = c0;
            k->gemm_nt(m, n, kk, a.data(), lda, bt.data(), ldbt, c1.data(), ldc);
            ref.gemm_nt(m, n, kk, a.data(), lda, bt.data(), ldbt, c2.data(), ldc);
            CHECK(max_rel(c1, c2) <= 1e-13);

            const size_t ldat = m + 2;
            const auto at = rand_vec(kk * ldat, 14);
            c1 = c0;
            c2 = c0;
            k->gemm_tn(m, n, kk, at.data(), ldat, b.data(), ldb, c1.data(), ldc);
            ref.gemm_tn(m, n, kk, at.data(), ldat, b.data(), ldb, c2.data(), ldc);
            CHECK(max_rel(c1, c2) <= 1e-13);
        }
    }
}

TEST_CASE("network ops agree across ISAs") {
    IsaRestore restore;
    const Tensor x = testing::random_tensor({3, 9, 11}, 1);
    const Tensor w = testing::random_tensor({5, 3, 3, 3}, 2);
    const Tensor b = testing::random_tensor({5}, 3);
    simd::set_active(simd::Isa::Scalar);
    const Tensor ref = nn::conv2d(nn::Var(x), nn::Var(w), nn::Var(b), 2, 1).value();
    for (const auto* k : simd::available_kernels()) {
        simd::set_active(k->isa);
        CHECK(simd::kernels().isa == k->isa);
        const Tensor out = nn::conv2d(nn::Var(x), nn::Var(w), nn::Var(b), 2, 1).value();
        CHECK(max_abs_diff(out, ref) < 1e-12);
    }
}
