// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>

#include "ldm3d/ae/autoencoder.hpp"
#include "ldm3d/data/rgbd.hpp"
#include "ldm3d/diffusion/sampler.hpp"

namespace ldm3d::sr {

// Monocular depth from a low-resolution RGB image: 3 x h x w -> 1 x h x w
// disparity in [-1, 1].
class DepthEstimator {
public:
    virtual ~DepthEstimator() = default;
    virtual std::string id() const = 0;
    virtual Tensor estimate(const Tensor& lr_rgb) const = 0;
};

// Stand-in estimator with no learned weights: disparity from luminance
// (brighter is nearer), rescaled to span [-1, 1] per image.
class LuminanceDepthEstimator final : public DepthEstimator {
public:
    std::string id() const override { return "luminance-v1"; }
    Tensor estimate(const Tensor& lr_rgb) const override;
};

enum class DepthLrKind { D, O, B };

std::string depth_lr_name(DepthLrKind k);  // "d", "o", "b"
DepthLrKind depth_lr_from_name(const std::string& s);

struct DepthLrStrategy {
    DepthLrKind kind = DepthLrKind::B;
    std::shared_ptr<const DepthEstimator> estimator;  // required iff kind == D

    void validate() const;
};

// Conditioning depth at HR resolution.
//   O: hr_depth unchanged.
//   B: bicubic /4 then bicubic x4.
//   D: estimator(lr_rgb), bicubic x4.
Tensor make_lr_depth(const Tensor& hr_depth, const Tensor& lr_rgb, const DepthLrStrategy& strategy);

// Upsamples lr_rgb x4 (bicubic, clamped to [-1, 1]), stacks it with
// lr_depth_cond and encodes. Returns the distribution mean multiplied by
// the autoencoder's latent_scale, i.e. in the space the denoiser sees.
Tensor prepare_lr_latent(const Tensor& lr_rgb, const Tensor& lr_depth_cond, const ae::KlAutoencoder& ae);

// Plain bicubic x4 of RGB and conditioning depth, the reference baseline.
RgbdSample bicubic_upscale(const Tensor& lr_rgb, const Tensor& lr_depth_cond);

struct UpscaleModels {
    const ae::KlAutoencoder& ae;
    const diffusion::UNet& unet;  // must take 8 input channels
    const diffusion::TextEncoder& text;
    const diffusion::NoiseSchedule& sched;
};

// Samples an HR latent conditioned on the LR latent (concatenated to the
// noise at every step), decodes and splits into RGBD at 4x the LR size.
RgbdSample upscale(const Tensor& lr_rgb, const Tensor& lr_depth_cond, const std::string& caption,
                   const UpscaleModels& models, const diffusion::SamplerConfig& sampler, uint64_t seed);

}  // namespace ldm3d::sr
