// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "ldm3d/ae/autoencoder.hpp"
#include "ldm3d/data/image_io.hpp"
#include "ldm3d/data/rgbd.hpp"
#include "ldm3d/diffusion/sampler.hpp"

namespace ldm3d::pano {

// Equirectangular RGBD, W == 2H; column 0 and column W-1 are neighbours.
struct Panorama {
    RgbdSample rgbd;
    bool wraps_horizontally = true;

    int64_t height() const { return rgbd.height(); }
    int64_t width() const { return rgbd.width(); }
};

void validate(const Panorama& p);

// v -> clamp((exposure v)^(1/gamma), 0, 1) mapped to [-1, 1]. Throws
// DataError on negative or non-finite radiance.
Tensor tonemap_hdr(const Tensor& hdr, real exposure, real gamma);
Tensor hdr_from_raster(const io::RasterF& img);

// Circular shift of all columns right by round(fraction * W) mod W.
Panorama roll_pano(const Panorama& p, real fraction);
int64_t roll_shift(int64_t width, real fraction);

// Mean |column 0 - column W-1| over every channel of RGB and depth.
real seam_discontinuity(const Panorama& p);

inline constexpr real kPrefix360Prob = 0.70;
inline constexpr real kPrefixPanoramicProb = 0.04;
inline constexpr const char* kPrefix360 = "360 view of ";
inline constexpr const char* kPrefixPanoramic = "panoramic view of ";

// Prefixes "360 view of " with probability 0.70 and "panoramic view of "
// with probability 0.04 (seeded per (raw, seed)); captions that already
// carry either prefix are returned unchanged.
std::string make_pano_caption(const std::string& raw, uint64_t seed);

struct PanoModels {
    const ae::KlAutoencoder& ae;
    const diffusion::UNet& unet;  // must take 4 input channels
    const diffusion::TextEncoder& text;
    const diffusion::NoiseSchedule& sched;
};

// Text-to-RGBD panorama: samples a latent_h x 2 latent_h latent and decodes
// it to 8 latent_h x 16 latent_h.
Panorama sample_pano(const std::string& prompt, int64_t latent_h, const PanoModels& models,
                     const diffusion::SamplerConfig& sampler, uint64_t seed, const diffusion::TraceFn& trace = {});

}  // namespace ldm3d::pano
