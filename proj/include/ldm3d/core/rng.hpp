// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "ldm3d/core/tensor.hpp"

namespace ldm3d {

uint64_t fnv1a(std::string_view s);
uint64_t splitmix64(uint64_t x);

// Child seed for a named substream ("data", "init", "sampler", ...).
uint64_t derive_seed(uint64_t root, std::string_view name);
uint64_t derive_seed(uint64_t root, uint64_t index);

// mt19937_64 has a standardized output sequence; the distributions on top are
// implemented here (not std::*_distribution) so streams are identical across
// standard library implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }
    // [0, 1)
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // [0, n)
    uint64_t below(uint64_t n);
    double normal();
    void fill_normal(Tensor& t, real stddev = 1.0);
    Tensor normal_like(const Shape& s, real stddev = 1.0);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Indices of the minibatch used at 1-based `step`: consecutive slices of a
// per-epoch seeded permutation of [0, n). Depends only on (seed, step).
std::vector<size_t> minibatch_indices(uint64_t seed, int64_t step, int64_t batch, size_t n);

}  // namespace ldm3d
