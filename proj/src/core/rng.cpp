// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include "ldm3d/core/rng.hpp"

#include <cmath>
#include <numbers>

namespace ldm3d {

uint64_t fnv1a(std::string_view s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

uint64_t derive_seed(uint64_t root, std::string_view name) { return splitmix64(root ^ fnv1a(name)); }

uint64_t derive_seed(uint64_t root, uint64_t index) { return splitmix64(splitmix64(root) + index); }

uint64_t Rng::below(uint64_t n) {
    // Rejection sampling keeps the draw unbiased.
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v;
    do {
        v = engine_();
    } while (v >= limit);
    return v % n;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(th);
    has_spare_ = true;
    return r * std::cos(th);
}

void Rng::fill_normal(Tensor& t, real stddev) {
    for (auto& v : t.values()) v = stddev * normal();
}

Tensor Rng::normal_like(const Shape& s, real stddev) {
    Tensor t(s);
    fill_normal(t, stddev);
    return t;
}

std::vector<size_t> minibatch_indices(uint64_t seed, int64_t step, int64_t batch, size_t n) {
    std::vector<size_t> out;
    out.reserve(static_cast<size_t>(batch));
    std::vector<size_t> perm;
    int64_t perm_epoch = -1;
    for (int64_t b = 0; b < batch; ++b) {
        const uint64_t i = static_cast<uint64_t>((step - 1) * batch + b);
        const auto epoch = static_cast<int64_t>(i / n);
        if (epoch != perm_epoch) {
            perm.resize(n);
            for (size_t k = 0; k < n; ++k) perm[k] = k;
            Rng rng(derive_seed(seed, static_cast<uint64_t>(epoch)));
            for (size_t k = n; k > 1; --k) std::swap(perm[k - 1], perm[rng.below(k)]);
            perm_epoch = epoch;
        }
        out.push_back(perm[i % n]);
    }
    return out;
}

}  // namespace ldm3d
