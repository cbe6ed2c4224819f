// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include "ldm3d/sr/pipeline.hpp"

#include <algorithm>

#include "ldm3d/core/error.hpp"
#include "ldm3d/sr/degrade.hpp"

namespace ldm3d::sr {

Tensor LuminanceDepthEstimator::estimate(const Tensor& lr_rgb) const {
    LDM3D_REQUIRE(lr_rgb.rank() == 3 && lr_rgb.channels() == 3, "depth estimator expects 3 x h x w");
    const int64_t n = lr_rgb.height() * lr_rgb.width();
    Tensor d(Shape{1, lr_rgb.height(), lr_rgb.width()});
    for (int64_t i = 0; i < n; ++i)
        d[i] = 0.299 * lr_rgb[i] + 0.587 * lr_rgb[n + i] + 0.114 * lr_rgb[2 * n + i];
    const real lo = d.min(), hi = d.max();
    if (hi - lo < 1e-12) return Tensor(d.shape(), 0.0);
    for (auto& v : d.values()) v = 2.0 * (v - lo) / (hi - lo) - 1.0;
    return d;
}

std::string depth_lr_name(DepthLrKind k) {
    switch (k) {
        case DepthLrKind::D: return "d";
        case DepthLrKind::O: return "o";
        case DepthLrKind::B: return "b";
    }
    return "?";
}

DepthLrKind depth_lr_from_name(const std::string& s) {
    if (s == "d" || s == "D") return DepthLrKind::D;
    if (s == "o" || s == "O") return DepthLrKind::O;
    if (s == "b" || s == "B") return DepthLrKind::B;
    throw ConfigError("depth-lr strategy must be one of d, o, b; got '" + s + "'");
}

void DepthLrStrategy::validate() const {
    if (kind == DepthLrKind::D && !estimator)
        throw ConfigError("depth-lr strategy D requires a depth estimator provider");
}

Tensor make_lr_depth(const Tensor& hr_depth, const Tensor& lr_rgb, const DepthLrStrategy& strategy) {
    strategy.validate();
    LDM3D_REQUIRE(hr_depth.rank() == 3 && hr_depth.channels() == 1,
                  "hr_depth must be 1 x H x W, got " + shape_str(hr_depth.shape()));
    const int64_t H = hr_depth.height(), W = hr_depth.width();
    LDM3D_REQUIRE(H % kScaleFactor == 0 && W % kScaleFactor == 0, "hr_depth dims must be divisible by 4");
    switch (strategy.kind) {
        case DepthLrKind::O:
            return hr_depth;
        case DepthLrKind::B:
            return resize(resize(hr_depth, H / kScaleFactor, W / kScaleFactor, Interp::Bicubic), H, W, Interp::Bicubic);
        case DepthLrKind::D: {
            LDM3D_REQUIRE(lr_rgb.rank() == 3 && lr_rgb.channels() == 3 && lr_rgb.height() * kScaleFactor == H &&
                              lr_rgb.width() * kScaleFactor == W,
                          "strategy D needs the LR RGB at a quarter of the HR depth size");
            Tensor est = strategy.estimator->estimate(lr_rgb);
            LDM3D_REQUIRE(est.shape() == Shape({1, lr_rgb.height(), lr_rgb.width()}),
                          "depth estimator returned " + shape_str(est.shape()));
            return resize(est, H, W, Interp::Bicubic);
        }
    }
    throw ContractError("unreachable depth strategy");
}

namespace {

Tensor clamp_unit(Tensor t) {
    for (auto& v : t.values()) v = std::clamp(v, -1.0, 1.0);
    return t;
}

}  // namespace

Tensor prepare_lr_latent(const Tensor& lr_rgb, const Tensor& lr_depth_cond, const ae::KlAutoencoder& ae) {
    LDM3D_REQUIRE(lr_rgb.rank() == 3 && lr_rgb.channels() == 3, "lr_rgb must be 3 x h x w");
    LDM3D_REQUIRE(lr_depth_cond.rank() == 3 && lr_depth_cond.channels() == 1 &&
                      lr_depth_cond.height() == lr_rgb.height() * kScaleFactor &&
                      lr_depth_cond.width() == lr_rgb.width() * kScaleFactor,
                  "lr_depth_cond " + shape_str(lr_depth_cond.shape()) + " must be 4x the LR RGB " +
                      shape_str(lr_rgb.shape()));
    Tensor up = clamp_unit(resize(lr_rgb, lr_depth_cond.height(), lr_depth_cond.width(), Interp::Bicubic));
    Tensor mean = ae.encode(merge_channels(up, lr_depth_cond)).mean;
    const real s = ae.config().latent_scale;
    for (auto& v : mean.values()) v *= s;
    return mean;
}

RgbdSample bicubic_upscale(const Tensor& lr_rgb, const Tensor& lr_depth_cond) {
    LDM3D_REQUIRE(lr_rgb.rank() == 3 && lr_rgb.channels() == 3, "lr_rgb must be 3 x h x w");
    RgbdSample s;
    const int64_t H = lr_rgb.height() * kScaleFactor, W = lr_rgb.width() * kScaleFactor;
    s.rgb = clamp_unit(resize(lr_rgb, H, W, Interp::Bicubic));
    s.depth = lr_depth_cond.height() == H ? lr_depth_cond : clamp_unit(resize(lr_depth_cond, H, W, Interp::Bicubic));
    return s;
}

RgbdSample upscale(const Tensor& lr_rgb, const Tensor& lr_depth_cond, const std::string& caption,
                   const UpscaleModels& models, const diffusion::SamplerConfig& sampler, uint64_t seed) {
    if (models.unet.in_channels() != 8)
        throw ConfigError("upscale needs an 8-channel denoiser, got " + std::to_string(models.unet.in_channels()));
    const Tensor lr_latent = prepare_lr_latent(lr_rgb, lr_depth_cond, models.ae);
    const auto cond = diffusion::embed_text(caption, models.text);
    const auto uncond = diffusion::embed_text("", models.text);
    ae::Latent z = diffusion::run_sampler(models.unet, lr_latent.shape(), cond, uncond, &lr_latent, models.sched,
                                          sampler, seed);
    auto [rgb, depth] = split_channels(models.ae.decode(z));
    RgbdSample out;
    out.rgb = std::move(rgb);
    out.depth = std::move(depth);
    out.caption = caption;
    return out;
}

}  // namespace ldm3d::sr
