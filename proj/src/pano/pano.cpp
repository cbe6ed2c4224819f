// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include "ldm3d/pano/pano.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "ldm3d/core/error.hpp"
#include "ldm3d/core/rng.hpp"

namespace ldm3d::pano {

void validate(const Panorama& p) {
    ldm3d::validate(p.rgbd);
    LDM3D_REQUIRE(p.width() == 2 * p.height(),
                  "panorama must be 2:1, got " + std::to_string(p.height()) + "x" + std::to_string(p.width()));
    LDM3D_REQUIRE(p.wraps_horizontally, "panoramas always wrap horizontally");
}

Tensor tonemap_hdr(const Tensor& hdr, real exposure, real gamma) {
    LDM3D_REQUIRE(hdr.rank() == 3 && hdr.channels() == 3, "tonemap_hdr expects 3 x H x W");
    if (!(exposure > 0) || !(gamma > 0)) throw ConfigError("tone-map exposure and gamma must be positive");
    Tensor out(hdr.shape());
    const real inv_gamma = 1.0 / gamma;
    for (int64_t i = 0; i < hdr.numel(); ++i) {
        const real v = hdr[i];
        if (!(v >= 0) || !std::isfinite(v)) throw DataError("HDR radiance must be finite and nonnegative");
        out[i] = 2.0 * std::clamp(std::pow(exposure * v, inv_gamma), 0.0, 1.0) - 1.0;
    }
    return out;
}

Tensor hdr_from_raster(const io::RasterF& img) {
    if (img.channels != 3) throw DataError("HDR image must have 3 channels, got " + std::to_string(img.channels));
    Tensor t(Shape{3, img.height, img.width});
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) t.at(c, y, x) = img.at(y, x, c);
    return t;
}

int64_t roll_shift(int64_t width, real fraction) {
    const auto s = static_cast<int64_t>(std::llround(fraction * static_cast<real>(width)));
    return ((s % width) + width) % width;
}

namespace {

Tensor roll_columns(const Tensor& t, int64_t shift) {
    const int64_t c = t.channels(), h = t.height(), w = t.width();
    Tensor out(t.shape());
    for (int64_t ch = 0; ch < c; ++ch)
        for (int64_t y = 0; y < h; ++y) {
            const real* src = t.data() + (ch * h + y) * w;
            real* dst = out.data() + (ch * h + y) * w;
            std::copy(src, src + (w - shift), dst + shift);
            std::copy(src + (w - shift), src + w, dst);
        }
    return out;
}

}  // namespace

Panorama roll_pano(const Panorama& p, real fraction) {
    validate(p);
    if (!std::isfinite(fraction)) throw ConfigError("roll fraction must be finite");
    const int64_t shift = roll_shift(p.width(), fraction);
    Panorama out = p;
    out.rgbd.rgb = roll_columns(p.rgbd.rgb, shift);
    out.rgbd.depth = roll_columns(p.rgbd.depth, shift);
    return out;
}

real seam_discontinuity(const Panorama& p) {
    validate(p);
    const int64_t h = p.height(), w = p.width();
    real acc = 0;
    for (const Tensor* t : {&p.rgbd.rgb, &p.rgbd.depth})
        for (int64_t ch = 0; ch < t->channels(); ++ch)
            for (int64_t y = 0; y < h; ++y) acc += std::abs(t->at(ch, y, 0) - t->at(ch, y, w - 1));
    return acc / static_cast<real>(4 * h);
}

namespace {

bool starts_with_ci(const std::string& s, const std::string& prefix) {
    if (s.size() < prefix.size()) return false;
    for (size_t i = 0; i < prefix.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
    return true;
}

}  // namespace

std::string make_pano_caption(const std::string& raw, uint64_t seed) {
    if (raw.empty()) throw DataError("panorama caption must be nonempty");
    if (starts_with_ci(raw, kPrefix360) || starts_with_ci(raw, kPrefixPanoramic)) return raw;
    Rng rng(derive_seed(seed, raw));
    const real u = rng.uniform();
    if (u < kPrefix360Prob) return kPrefix360 + raw;
    if (u < kPrefix360Prob + kPrefixPanoramicProb) return kPrefixPanoramic + raw;
    return raw;
}

Panorama sample_pano(const std::string& prompt, int64_t latent_h, const PanoModels& models,
                     const diffusion::SamplerConfig& sampler, uint64_t seed, const diffusion::TraceFn& trace) {
    if (models.unet.in_channels() != 4)
        throw ConfigError("pano sampling needs a 4-channel denoiser, got " +
                          std::to_string(models.unet.in_channels()));
    LDM3D_REQUIRE(latent_h >= 2 && latent_h % 2 == 0, "latent height must be even and >= 2");
    const auto cond = diffusion::embed_text(prompt, models.text);
    const auto uncond = diffusion::embed_text("", models.text);
    ae::Latent z = diffusion::run_sampler(models.unet, Shape{4, latent_h, 2 * latent_h}, cond, uncond, nullptr,
                                          models.sched, sampler, seed, trace);
    auto [rgb, depth] = split_channels(models.ae.decode(z));
    Panorama p;
    p.rgbd.rgb = std::move(rgb);
    p.rgbd.depth = std::move(depth);
    p.rgbd.caption = prompt;
    validate(p);
    return p;
}

}  // namespace ldm3d::pano
