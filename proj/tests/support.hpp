// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <string>
#include <vector>

#include "ldm3d/core/rng.hpp"
#include "ldm3d/data/rgbd.hpp"
#include "ldm3d/diffusion/denoiser.hpp"

namespace testing {

using namespace ldm3d;
namespace fs = std::filesystem;

inline Tensor random_tensor(const Shape& s, uint64_t seed, real lo = -1, real hi = 1) {
    Rng rng(seed);
    Tensor t(s);
    for (auto& v : t.values()) v = rng.uniform(lo, hi);
    return t;
}

// Fresh empty directory under the system temp dir.
inline fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("ldm3d-test-" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

inline std::string read_bytes(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// Smooth synthetic RGBD: per-sample sinusoids in RGB, a tilted plane plus a
// bump in depth.
inline RgbdSample synthetic_rgbd(int64_t h, int64_t w, uint64_t seed, real freq_lo = 0.05, real freq_hi = 0.3) {
    Rng rng(seed);
    RgbdSample s;
    s.rgb = Tensor(Shape{3, h, w});
    s.depth = Tensor(Shape{1, h, w});
    const real fx = rng.uniform(freq_lo, freq_hi), fy = rng.uniform(freq_lo, freq_hi), ph = rng.uniform(0, 6);
    const real tilt = rng.uniform(-0.6, 0.6), cy = rng.uniform(0.3, 0.7) * h, cx = rng.uniform(0.3, 0.7) * w;
    for (int64_t c = 0; c < 3; ++c)
        for (int64_t y = 0; y < h; ++y)
            for (int64_t x = 0; x < w; ++x) s.rgb.at(c, y, x) = 0.8 * std::sin(fx * x + fy * y * (c + 1) + ph + c);
    for (int64_t y = 0; y < h; ++y)
        for (int64_t x = 0; x < w; ++x) {
            const real r2 = ((y - cy) * (y - cy) + (x - cx) * (x - cx)) / (0.05 * h * w);
            s.depth.at(0, y, x) = std::clamp(tilt * (2.0 * y / (h - 1) - 1.0) + 0.3 * std::exp(-r2), -1.0, 1.0);
        }
    s.id = "s" + std::to_string(seed);
    s.caption = "synthetic scene " + std::to_string(seed);
    return s;
}

// Denoisers with known behaviour, for sampler tests.
class FnEpsModel final : public diffusion::EpsModel {
public:
    using Fn = std::function<Tensor(const Tensor& input, int t, const diffusion::TextCondition&)>;
    FnEpsModel(int64_t in_channels, Fn fn) : in_(in_channels), fn_(std::move(fn)) {}
    int64_t in_channels() const override { return in_; }
    nn::Var forward(const nn::Var& input, int t, const diffusion::TextCondition& c) const override {
        return nn::Var(fn_(input.value(), t, c));
    }

private:
    int64_t in_;
    Fn fn_;
};

inline Tensor first_channels(const Tensor& x, int64_t n) { return x.channel_slice(0, n); }

}  // namespace testing
