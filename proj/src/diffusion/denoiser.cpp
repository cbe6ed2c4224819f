// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include "ldm3d/diffusion/denoiser.hpp"

#include <algorithm>
#include <cmath>

#include "ldm3d/core/error.hpp"
#include "ldm3d/core/json_util.hpp"
#include "ldm3d/core/rng.hpp"

namespace ldm3d::diffusion {

using nn::Var;

void DenoiserConfig::validate() const {
    if (in_channels != 4 && in_channels != 8)
        throw ConfigError("denoiser in_channels must be 4 or 8, got " + std::to_string(in_channels));
    if (out_channels != kLatentChannels) throw ConfigError("denoiser out_channels must be 4");
    if (context_dim < 1 || base_width < 2 || base_width % 2 != 0)
        throw ConfigError("denoiser needs context_dim >= 1 and an even base_width >= 2");
    for (int l : attn_resolutions)
        if (l != 0 && l != 1) throw ConfigError("attn_resolutions entries must be 0 or 1");
}

nlohmann::json to_json(const DenoiserConfig& c) {
    return {{"in_channels", c.in_channels},
            {"out_channels", c.out_channels},
            {"context_dim", c.context_dim},
            {"base_width", c.base_width},
            {"attn_resolutions", c.attn_resolutions}};
}

DenoiserConfig denoiser_config_from_json(const nlohmann::json& j) {
    const std::string where = "denoiser config";
    reject_unknown_keys(j, {"in_channels", "out_channels", "context_dim", "base_width", "attn_resolutions"}, where);
    DenoiserConfig c;
    c.in_channels = get_or(j, "in_channels", c.in_channels, where);
    c.out_channels = get_or(j, "out_channels", c.out_channels, where);
    c.context_dim = get_or(j, "context_dim", c.context_dim, where);
    c.base_width = get_or(j, "base_width", c.base_width, where);
    c.attn_resolutions = get_or(j, "attn_resolutions", c.attn_resolutions, where);
    c.validate();
    return c;
}

Tensor timestep_embedding(int t, int64_t dim) {
    const int64_t half = dim / 2;
    Tensor e(Shape{1, dim});
    for (int64_t i = 0; i < half; ++i) {
        const real freq = std::exp(-std::log(10000.0) * static_cast<real>(i) / static_cast<real>(half));
        e[i] = std::sin(t * freq);
        e[half + i] = std::cos(t * freq);
    }
    return e;
}

UNet::UNet(DenoiserConfig cfg, uint64_t init_seed) : cfg_(std::move(cfg)) {
    cfg_.validate();
    Rng rng(init_seed);
    const int64_t w = cfg_.base_width;
    const int64_t tdim = 2 * w;
    time1_ = nn::Linear(w, tdim, rng);
    time2_ = nn::Linear(tdim, tdim, rng);
    conv_in_ = nn::Conv2d(cfg_.in_channels, w, 3, 1, rng);
    res0_ = nn::ResBlock(w, w, tdim, rng);
    if (attn_at(0)) attn0_.emplace(w, cfg_.context_dim, rng);
    down_ = nn::Conv2d(w, w, 3, 2, rng);
    res1_ = nn::ResBlock(w, 2 * w, tdim, rng);
    if (attn_at(1)) attn1_.emplace(2 * w, cfg_.context_dim, rng);
    mid_ = nn::ResBlock(2 * w, 2 * w, tdim, rng);
    up_ = nn::Conv2d(2 * w, w, 3, 1, rng);
    res_up_ = nn::ResBlock(2 * w, w, tdim, rng);
    if (attn_at(0)) attn_up_.emplace(w, cfg_.context_dim, rng);
    norm_out_ = nn::GroupNorm(w);
    conv_out_ = nn::Conv2d(w, cfg_.out_channels, 3, 1, rng, 0.5);
}

bool UNet::attn_at(int level) const {
    return std::find(cfg_.attn_resolutions.begin(), cfg_.attn_resolutions.end(), level) != cfg_.attn_resolutions.end();
}

Var UNet::forward(const Var& input, int t, const TextCondition& cond) const {
    LDM3D_REQUIRE(input.shape().size() == 3 && input.shape()[0] == cfg_.in_channels,
                  "U-Net expects " + std::to_string(cfg_.in_channels) + " input channels, got " +
                      shape_str(input.shape()));
    LDM3D_REQUIRE(input.shape()[1] % 2 == 0 && input.shape()[2] % 2 == 0, "U-Net needs even latent dims");
    LDM3D_REQUIRE(cond.tokens_embedding.rank() == 2 && cond.context_dim() == cfg_.context_dim,
                  "text condition width does not match the denoiser context_dim");
    Var temb = time2_(nn::silu(time1_(Var(timestep_embedding(t, cfg_.base_width)))));
    Var ctx(cond.tokens_embedding);

    Var h0 = res0_(conv_in_(input), temb);
    if (attn0_) h0 = (*attn0_)(h0, ctx);
    Var h1 = res1_(down_(h0), temb);
    if (attn1_) h1 = (*attn1_)(h1, ctx);
    Var h = mid_(h1, temb);
    h = up_(nn::upsample_nearest2x(h));
    h = res_up_(nn::concat_channels(h, h0), temb);
    if (attn_up_) h = (*attn_up_)(h, ctx);
    return conv_out_(nn::silu(norm_out_(h)));
}

nn::NamedParams UNet::params() const {
    nn::NamedParams out;
    time1_.collect(out, "time.fc1");
    time2_.collect(out, "time.fc2");
    conv_in_.collect(out, "conv_in");
    res0_.collect(out, "down0.res");
    if (attn0_) attn0_->collect(out, "down0.attn");
    down_.collect(out, "down0.downsample");
    res1_.collect(out, "down1.res");
    if (attn1_) attn1_->collect(out, "down1.attn");
    mid_.collect(out, "mid.res");
    up_.collect(out, "up0.upsample");
    res_up_.collect(out, "up0.res");
    if (attn_up_) attn_up_->collect(out, "up0.attn");
    norm_out_.collect(out, "norm_out");
    conv_out_.collect(out, "conv_out");
    return out;
}

nn::Checkpoint UNet::to_checkpoint() const {
    nn::Checkpoint c;
    c.kind = kUNetCheckpointKind;
    c.config = to_json(cfg_);
    nn::store_params(c, params(), "model.");
    return c;
}

UNet UNet::from_checkpoint(const nn::Checkpoint& ckpt) {
    if (ckpt.kind != kUNetCheckpointKind)
        throw DataError("expected a " + std::string(kUNetCheckpointKind) + " checkpoint, got '" + ckpt.kind + "'");
    UNet m(denoiser_config_from_json(ckpt.config), 0);
    auto p = m.params();
    nn::restore_params(ckpt, p, "model.");
    return m;
}

UNet UNet::load(const std::filesystem::path& path) { return from_checkpoint(nn::load_checkpoint(path)); }

Var assemble_input(const EpsModel& model, const Var& z_t, const Tensor* extra_latent) {
    LDM3D_REQUIRE(z_t.shape().size() == 3 && z_t.shape()[0] == kLatentChannels,
                  "noisy latent must be 4 x h x w, got " + shape_str(z_t.shape()));
    if (model.in_channels() == kLatentChannels) {
        if (extra_latent)
            throw ContractError("a 4-channel denoiser does not take a conditioning latent");
        return z_t;
    }
    if (!extra_latent) throw ContractError("an 8-channel denoiser requires a conditioning latent");
    LDM3D_REQUIRE(extra_latent->rank() == 3 && extra_latent->channels() == kLatentChannels,
                  "conditioning latent must have 4 channels, got " + shape_str(extra_latent->shape()));
    LDM3D_REQUIRE(extra_latent->height() == z_t.shape()[1] && extra_latent->width() == z_t.shape()[2],
                  "conditioning latent " + shape_str(extra_latent->shape()) + " does not match noisy latent " +
                      shape_str(z_t.shape()));
    return nn::concat_channels(z_t, Var(*extra_latent));
}

Tensor denoise_step(const EpsModel& model, const Tensor& z_t, int t, const TextCondition& cond,
                    const Tensor* extra_latent) {
    nn::NoGradGuard ng;
    Var out = model.forward(assemble_input(model, Var(z_t), extra_latent), t, cond);
    LDM3D_REQUIRE(out.shape() == z_t.shape(), "denoiser output shape " + shape_str(out.shape()) +
                                                  " does not match latent " + shape_str(z_t.shape()));
    return out.value();
}

Var training_loss(const EpsModel& model, const Tensor& z0, const TextCondition& cond, const Tensor* extra_latent,
                  const NoiseSchedule& sched, uint64_t seed) {
    Rng rng(seed);
    const int t = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(sched.T)));
    Tensor eps = rng.normal_like(z0.shape());
    Var input = assemble_input(model, Var(add_noise(z0, t, eps, sched)), extra_latent);
    Var eps_hat = model.forward(input, t, cond);
    LDM3D_REQUIRE(eps_hat.shape() == z0.shape(), "denoiser output shape does not match the latent");
    return nn::mse(eps_hat, Var(std::move(eps)));
}

}  // namespace ldm3d::diffusion
