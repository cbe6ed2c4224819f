// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include "ldm3d/sr/degrade.hpp"

#include <cmath>

#include "ldm3d/core/error.hpp"
#include "ldm3d/core/json_util.hpp"
#include "ldm3d/core/rng.hpp"
#include "ldm3d/data/rgbd.hpp"

namespace ldm3d::sr {

void DegradationRecipe::validate() const {
    if (downscale_factor != kScaleFactor) throw ConfigError("downscale_factor must be 4");
    auto check = [](const Range& r, const char* name, real min) {
        if (!(r.lo <= r.hi) || !(r.lo >= min) || !std::isfinite(r.hi))
            throw ConfigError(std::string("degradation range '") + name + "' is empty or out of bounds");
    };
    check(blur_sigma, "blur_sigma", 0);
    check(noise_sigma, "noise_sigma", 0);
    check(jpeg_quality, "jpeg_quality", 1);
    if (jpeg_quality.hi > 100) throw ConfigError("jpeg_quality must be <= 100");
    if (!(weight_bicubic >= 0 && weight_bilinear >= 0 && weight_nearest >= 0) ||
        !(weight_bicubic + weight_bilinear + weight_nearest > 0))
        throw ConfigError("interpolation weights must be nonnegative with a positive sum");
}

nlohmann::json to_json(const DegradationRecipe& r) {
    return {{"blur_sigma", {r.blur_sigma.lo, r.blur_sigma.hi}},
            {"downscale_factor", r.downscale_factor},
            {"interp_weights", {{"bicubic", r.weight_bicubic}, {"bilinear", r.weight_bilinear}, {"nearest", r.weight_nearest}}},
            {"noise_sigma", {r.noise_sigma.lo, r.noise_sigma.hi}},
            {"jpeg_quality", {r.jpeg_quality.lo, r.jpeg_quality.hi}},
            {"seed", r.seed}};
}

namespace {

Range range_from(const nlohmann::json& j, const char* key, Range fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ConfigError(where + ": '" + key + "' must be a [lo, hi] pair");
    return {v[0].get<real>(), v[1].get<real>()};
}

}  // namespace

DegradationRecipe recipe_from_json(const nlohmann::json& j) {
    const std::string where = "degradation recipe";
    reject_unknown_keys(j, {"blur_sigma", "downscale_factor", "interp_weights", "noise_sigma", "jpeg_quality", "seed"},
                        where);
    DegradationRecipe r;
    r.blur_sigma = range_from(j, "blur_sigma", r.blur_sigma, where);
    r.noise_sigma = range_from(j, "noise_sigma", r.noise_sigma, where);
    r.jpeg_quality = range_from(j, "jpeg_quality", r.jpeg_quality, where);
    r.downscale_factor = get_or(j, "downscale_factor", r.downscale_factor, where);
    r.seed = get_or(j, "seed", r.seed, where);
    if (j.contains("interp_weights")) {
        const auto& w = j.at("interp_weights");
        reject_unknown_keys(w, {"bicubic", "bilinear", "nearest"}, where + ".interp_weights");
        r.weight_bicubic = get_or(w, "bicubic", r.weight_bicubic, where);
        r.weight_bilinear = get_or(w, "bilinear", r.weight_bilinear, where);
        r.weight_nearest = get_or(w, "nearest", r.weight_nearest, where);
    }
    r.validate();
    return r;
}

nlohmann::json to_json(const DegradationDraw& d) {
    return {{"blur_sigma", d.blur_sigma},
            {"interp", interp_name(d.mode)},
            {"noise_sigma", d.noise_sigma},
            {"jpeg_quality", d.jpeg_quality}};
}

DegradationDraw draw_degradation(const DegradationRecipe& r) {
    r.validate();
    Rng rng(derive_seed(r.seed, "degrade"));
    DegradationDraw d;
    d.blur_sigma = rng.uniform(r.blur_sigma.lo, r.blur_sigma.hi);
    const real total = r.weight_bicubic + r.weight_bilinear + r.weight_nearest;
    const real u = rng.uniform() * total;
    d.mode = u < r.weight_bicubic                       ? Interp::Bicubic
             : u < r.weight_bicubic + r.weight_bilinear ? Interp::Bilinear
                                                        : Interp::Nearest;
    d.noise_sigma = rng.uniform(r.noise_sigma.lo, r.noise_sigma.hi);
    const auto qlo = static_cast<int>(std::ceil(r.jpeg_quality.lo));
    const auto qhi = static_cast<int>(std::floor(r.jpeg_quality.hi));
    if (qlo > qhi) throw ConfigError("jpeg_quality range contains no integer");
    d.jpeg_quality = qlo + static_cast<int>(rng.below(static_cast<uint64_t>(qhi - qlo + 1)));
    return d;
}

Tensor bsr_degrade(const Tensor& hr_rgb, const DegradationRecipe& recipe, DegradationDraw* drawn) {
    LDM3D_REQUIRE(hr_rgb.rank() == 3 && hr_rgb.channels() == 3,
                  "bsr_degrade expects 3 x H x W, got " + shape_str(hr_rgb.shape()));
    if (hr_rgb.height() % kScaleFactor != 0 || hr_rgb.width() % kScaleFactor != 0)
        throw DataError("bsr_degrade: " + shape_str(hr_rgb.shape()) + " is not divisible by 4");
    const DegradationDraw d = draw_degradation(recipe);
    if (drawn) *drawn = d;

    Tensor x = gaussian_blur(hr_rgb, d.blur_sigma);
    x = resize(x, hr_rgb.height() / kScaleFactor, hr_rgb.width() / kScaleFactor, d.mode);
    if (d.noise_sigma > 0) {
        Rng rng(derive_seed(recipe.seed, "noise"));
        for (auto& v : x.values()) v += 2.0 * d.noise_sigma * rng.normal();
    }
    // rgb_to_raster clamps, so the output is back in [-1, 1].
    return rgb_from_raster(io::jpeg_roundtrip(rgb_to_raster(x), d.jpeg_quality));
}

}  // namespace ldm3d::sr
