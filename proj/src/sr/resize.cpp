// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include "ldm3d/sr/resize.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ldm3d/core/error.hpp"

namespace ldm3d::sr {

std::string interp_name(Interp m) {
    switch (m) {
        case Interp::Bicubic: return "bicubic";
        case Interp::Bilinear: return "bilinear";
        case Interp::Nearest: return "nearest";
    }
    return "?";
}

Interp interp_from_name(const std::string& s) {
    if (s == "bicubic") return Interp::Bicubic;
    if (s == "bilinear") return Interp::Bilinear;
    if (s == "nearest") return Interp::Nearest;
    throw ConfigError("unknown interpolation mode '" + s + "'");
}

namespace {

real cubic(real x) {
    constexpr real a = -0.5;
    x = std::abs(x);
    if (x <= 1) return ((a + 2) * x - (a + 3)) * x * x + 1;
    if (x < 2) return ((x - 5) * x + 8) * x * a - 4 * a;
    return 0;
}

// Sparse 1-D resampling matrix: for each output index, (source index, weight).
struct Taps {
    std::vector<int64_t> index;
    std::vector<real> weight;
    int64_t per_out = 0;
};

Taps make_taps(int64_t in, int64_t out, Interp mode) {
    Taps t;
    const real scale = static_cast<real>(in) / static_cast<real>(out);
    t.per_out = mode == Interp::Bicubic ? 4 : mode == Interp::Bilinear ? 2 : 1;
    t.index.resize(static_cast<size_t>(out * t.per_out));
    t.weight.resize(t.index.size());
    auto clampi = [in](int64_t i) { return std::clamp<int64_t>(i, 0, in - 1); };
    for (int64_t o = 0; o < out; ++o) {
        const real src = (static_cast<real>(o) + 0.5) * scale - 0.5;
        const size_t base = static_cast<size_t>(o * t.per_out);
        if (mode == Interp::Nearest) {
            t.index[base] = clampi(static_cast<int64_t>(std::floor((static_cast<real>(o) + 0.5) * scale)));
            t.weight[base] = 1;
            continue;
        }
        const auto f = static_cast<int64_t>(std::floor(src));
        const real frac = src - static_cast<real>(f);
        if (mode == Interp::Bilinear) {
            t.index[base] = clampi(f);
            t.index[base + 1] = clampi(f + 1);
            t.weight[base] = 1 - frac;
            t.weight[base + 1] = frac;
            continue;
        }
        for (int64_t k = 0; k < 4; ++k) {
            t.index[base + static_cast<size_t>(k)] = clampi(f - 1 + k);
            t.weight[base + static_cast<size_t>(k)] = cubic(frac - static_cast<real>(k - 1));
        }
    }
    return t;
}

Tensor apply_rows(const Tensor& img, const Taps& tx, int64_t out_w) {
    const int64_t c = img.channels(), h = img.height(), w = img.width();
    Tensor out(Shape{c, h, out_w});
    for (int64_t ch = 0; ch < c; ++ch)
        for (int64_t y = 0; y < h; ++y) {
            const real* src = img.data() + (ch * h + y) * w;
            real* dst = out.data() + (ch * h + y) * out_w;
            for (int64_t x = 0; x < out_w; ++x) {
                real acc = 0;
                for (int64_t k = 0; k < tx.per_out; ++k) {
                    const size_t i = static_cast<size_t>(x * tx.per_out + k);
                    acc += tx.weight[i] * src[tx.index[i]];
                }
                dst[x] = acc;
            }
        }
    return out;
}

Tensor apply_cols(const Tensor& img, const Taps& ty, int64_t out_h) {
    const int64_t c = img.channels(), h = img.height(), w = img.width();
    Tensor out(Shape{c, out_h, w});
    for (int64_t ch = 0; ch < c; ++ch)
        for (int64_t y = 0; y < out_h; ++y) {
            real* dst = out.data() + (ch * out_h + y) * w;
            for (int64_t k = 0; k < ty.per_out; ++k) {
                const size_t i = static_cast<size_t>(y * ty.per_out + k);
                const real wt = ty.weight[i];
                const real* src = img.data() + (ch * h + ty.index[i]) * w;
                for (int64_t x = 0; x < w; ++x) dst[x] += wt * src[x];
            }
        }
    return out;
}

}  // namespace

Tensor resize(const Tensor& img, int64_t out_h, int64_t out_w, Interp mode) {
    LDM3D_REQUIRE(img.rank() == 3, "resize expects C x H x W, got " + shape_str(img.shape()));
    LDM3D_REQUIRE(out_h >= 1 && out_w >= 1, "resize target must be positive");
    Tensor tmp = apply_rows(img, make_taps(img.width(), out_w, mode), out_w);
    return apply_cols(tmp, make_taps(img.height(), out_h, mode), out_h);
}

Tensor gaussian_blur(const Tensor& img, real sigma) {
    LDM3D_REQUIRE(img.rank() == 3, "gaussian_blur expects C x H x W");
    if (!(sigma > 0)) return img;
    const auto r = static_cast<int64_t>(std::ceil(3 * sigma));
    std::vector<real> k(static_cast<size_t>(2 * r + 1));
    real total = 0;
    for (int64_t i = -r; i <= r; ++i) {
        const real v = std::exp(-0.5 * static_cast<real>(i * i) / (sigma * sigma));
        k[static_cast<size_t>(i + r)] = v;
        total += v;
    }
    for (auto& v : k) v /= total;

    auto taps_for = [&](int64_t n) {
        Taps t;
        t.per_out = 2 * r + 1;
        t.index.resize(static_cast<size_t>(n * t.per_out));
        t.weight.resize(t.index.size());
        for (int64_t o = 0; o < n; ++o)
            for (int64_t i = -r; i <= r; ++i) {
                const size_t at = static_cast<size_t>(o * t.per_out + i + r);
                t.index[at] = std::clamp<int64_t>(o + i, 0, n - 1);
                t.weight[at] = k[static_cast<size_t>(i + r)];
            }
        return t;
    };
    Tensor tmp = apply_rows(img, taps_for(img.width()), img.width());
    return apply_cols(tmp, taps_for(img.height()), img.height());
}

}  // namespace ldm3d::sr
