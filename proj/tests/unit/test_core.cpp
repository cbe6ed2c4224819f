// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <set>

#include "doctest.h"
#include "ldm3d/core/error.hpp"
#include "ldm3d/core/rng.hpp"
#include "support.hpp"

using namespace ldm3d;

TEST_CASE("tensor basics") {
    Tensor t(Shape{2, 3, 4}, 1.5);
    CHECK(t.numel() == 24);
    CHECK(t.channels() == 2);
    CHECK(t.height() == 3);
    CHECK(t.width() == 4);
    t.at(1, 2, 3) = -2;
    CHECK(t[23] == -2);
    CHECK(t.min() == -2);
    CHECK(t.max() == 1.5);
    CHECK(t.all_finite());
    t[0] = std::nan("");
    CHECK_FALSE(t.all_finite());

    Tensor a = testing::random_tensor({3, 2, 2}, 1), b = testing::random_tensor({1, 2, 2}, 2);
    Tensor c = Tensor::concat_channels(a, b);
    CHECK(c.shape() == Shape{4, 2, 2});
    CHECK(c.channel_slice(0, 3) == a);
    CHECK(c.channel_slice(3, 4) == b);
    CHECK_THROWS_AS(Tensor(Shape{2, 2}, std::vector<real>(3)), ContractError);
}

TEST_CASE("rng streams are reproducible and distinct") {
    Rng a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        (void)c.next_u64();
    }
    CHECK(Rng(42).next_u64() != Rng(43).next_u64());
    CHECK(derive_seed(7, "data") != derive_seed(7, "init"));
    CHECK(derive_seed(7, uint64_t{0}) != derive_seed(7, uint64_t{1}));
    CHECK(derive_seed(7, "data") == derive_seed(7, "data"));
}

TEST_CASE("normal draws have unit moments") {
    Rng rng(5);
    const int n = 200000;
    real s = 0, ss = 0;
    for (int i = 0; i < n; ++i) {
        const real v = rng.normal();
        s += v;
        ss += v * v;
    }
    const real mean = s / n, var = ss / n - mean * mean;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(n));
    CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("below is unbiased over a small range") {
    Rng rng(9);
    std::vector<int> counts(6, 0);
    for (int i = 0; i < 60000; ++i) ++counts[rng.below(6)];
    for (int c : counts) CHECK(std::abs(c - 10000) < 400);
}

TEST_CASE("minibatch indices depend only on seed and step") {
    const size_t n = 7;
    // Each epoch visits every index once.
    std::multiset<size_t> seen;
    for (int64_t step = 1; step <= 7; ++step)
        for (auto i : minibatch_indices(3, step, 1, n)) seen.insert(i);
    for (size_t i = 0; i < n; ++i) CHECK(seen.count(i) == 1);
    CHECK(minibatch_indices(3, 11, 4, n) == minibatch_indices(3, 11, 4, n));
    CHECK(minibatch_indices(3, 11, 4, n) != minibatch_indices(4, 11, 4, n));
}
