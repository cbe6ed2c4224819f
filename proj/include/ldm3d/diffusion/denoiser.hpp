// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "json.hpp"
#include "ldm3d/diffusion/schedule.hpp"
#include "ldm3d/diffusion/text.hpp"
#include "ldm3d/nn/checkpoint.hpp"
#include "ldm3d/nn/layers.hpp"

namespace ldm3d::diffusion {

inline constexpr int64_t kLatentChannels = 4;

// Anything that predicts the noise in a 4-channel latent. `input` is the
// already-assembled network input: the noisy latent alone (4 channels) or
// the noisy latent followed by the conditioning latent (8 channels).
class EpsModel {
public:
    virtual ~EpsModel() = default;
    virtual int64_t in_channels() const = 0;
    virtual nn::Var forward(const nn::Var& input, int t, const TextCondition& cond) const = 0;
};

struct DenoiserConfig {
    int64_t in_channels = 4;  // 4: text-to-RGBD, 8: super-resolution
    int64_t out_channels = 4;
    int64_t context_dim = 16;
    int64_t base_width = 32;
    // Levels (0 = full latent resolution, 1 = half) carrying cross-attention.
    std::vector<int> attn_resolutions{0, 1};

    void validate() const;
};

nlohmann::json to_json(const DenoiserConfig& c);
DenoiserConfig denoiser_config_from_json(const nlohmann::json& j);

// Sinusoidal embedding of a scalar timestep, 1 x dim.
Tensor timestep_embedding(int t, int64_t dim);

// Two-level U-Net: residual blocks with time injection and one
// cross-attention block per configured level, a single skip connection.
class UNet final : public EpsModel {
public:
    UNet(DenoiserConfig cfg, uint64_t init_seed);

    const DenoiserConfig& config() const { return cfg_; }
    int64_t in_channels() const override { return cfg_.in_channels; }
    nn::Var forward(const nn::Var& input, int t, const TextCondition& cond) const override;

    nn::NamedParams params() const;
    nn::Checkpoint to_checkpoint() const;
    static UNet from_checkpoint(const nn::Checkpoint& ckpt);
    static UNet load(const std::filesystem::path& path);

private:
    bool attn_at(int level) const;

    DenoiserConfig cfg_;
    nn::Linear time1_, time2_;
    nn::Conv2d conv_in_;
    nn::ResBlock res0_;
    std::optional<nn::CrossAttention> attn0_;
    nn::Conv2d down_;
    nn::ResBlock res1_;
    std::optional<nn::CrossAttention> attn1_;
    nn::ResBlock mid_;
    nn::Conv2d up_;
    nn::ResBlock res_up_;
    std::optional<nn::CrossAttention> attn_up_;
    nn::GroupNorm norm_out_;
    nn::Conv2d conv_out_;
};

inline constexpr const char* kUNetCheckpointKind = "unet";

// Assembles the network input per the channel contract and returns the
// predicted noise (4 channels, same shape as z_t). A 4-channel model
// rejects `extra_latent`; an 8-channel model requires it, spatially equal to
// z_t. Channel order: [z_t (0-3), extra_latent (4-7)].
Tensor denoise_step(const EpsModel& model, const Tensor& z_t, int t, const TextCondition& cond,
                    const Tensor* extra_latent = nullptr);
nn::Var assemble_input(const EpsModel& model, const nn::Var& z_t, const Tensor* extra_latent);

// Epsilon-prediction loss: t ~ U{1..T} and eps ~ N(0, I) drawn from `seed`,
// returns mean((eps - eps_hat)^2).
nn::Var training_loss(const EpsModel& model, const Tensor& z0, const TextCondition& cond, const Tensor* extra_latent,
                      const NoiseSchedule& sched, uint64_t seed);

}  // namespace ldm3d::diffusion
