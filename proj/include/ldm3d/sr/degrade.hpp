// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "json.hpp"
#include "ldm3d/sr/resize.hpp"

namespace ldm3d::sr {

inline constexpr int64_t kScaleFactor = 4;

struct Range {
    real lo = 0, hi = 0;
};

// Randomized blur -> /4 resize -> additive noise -> JPEG. Noise sigma is in
// [0, 1] intensity units; images live in [-1, 1] so it is doubled on apply.
struct DegradationRecipe {
    Range blur_sigma{0.2, 2.0};
    int64_t downscale_factor = kScaleFactor;
    // Relative choice weights for bicubic, bilinear, nearest.
    real weight_bicubic = 1.0, weight_bilinear = 1.0, weight_nearest = 1.0;
    Range noise_sigma{0.0, 10.0 / 255.0};
    Range jpeg_quality{60, 95};
    uint64_t seed = 0;

    void validate() const;
};

nlohmann::json to_json(const DegradationRecipe& r);
DegradationRecipe recipe_from_json(const nlohmann::json& j);

// The concrete parameters one expansion of a recipe produced.
struct DegradationDraw {
    real blur_sigma = 0;
    Interp mode = Interp::Bicubic;
    real noise_sigma = 0;
    int jpeg_quality = 95;
};

nlohmann::json to_json(const DegradationDraw& d);

DegradationDraw draw_degradation(const DegradationRecipe& r);

// hr_rgb is 3 x H x W in [-1, 1] with H, W divisible by 4; returns
// 3 x H/4 x W/4 in [-1, 1]. Pure function of (hr_rgb, recipe).
Tensor bsr_degrade(const Tensor& hr_rgb, const DegradationRecipe& recipe, DegradationDraw* drawn = nullptr);

}  // namespace ldm3d::sr
