// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "ldm3d/data/rgbd.hpp"
#include "ldm3d/nn/checkpoint.hpp"
#include "ldm3d/nn/layers.hpp"

namespace ldm3d::ae {

inline constexpr int64_t kImageChannels = 4;   // R, G, B, D
inline constexpr int64_t kLatentChannels = 4;
inline constexpr real kLogvarMin = -30.0;
inline constexpr real kLogvarMax = 20.0;

struct AeConfig {
    int64_t base_channels = 8;
    // One entry per /2 stage; exactly three stages give the /8 latent.
    std::vector<int64_t> channel_multipliers{1, 2, 2};
    real kl_weight = 1e-6;
    real recon_rgb_weight = 1.0;
    real recon_depth_weight = 1.0;
    real latent_scale = 1.0;

    void validate() const;
};

nlohmann::json to_json(const AeConfig& c);
// Rejects unknown keys.
AeConfig ae_config_from_json(const nlohmann::json& j);

// Diagonal Gaussian over the latent; logvar already clamped.
struct LatentDistribution {
    Tensor mean;
    Tensor logvar;
};

struct Latent {
    Tensor z;
    bool scale_applied = false;
};

// z = mean + exp(logvar / 2) * eps, eps ~ N(0, I) drawn from `seed`; then
// multiplied by `latent_scale` when `apply_scale`.
Latent sample_latent(const LatentDistribution& dist, uint64_t seed, real latent_scale = 1.0, bool apply_scale = false);

struct AeLossTerms {
    nn::Var recon_rgb;    // weighted MAE over channels 0-2
    nn::Var recon_depth;  // weighted MAE over channel 3
    nn::Var kl;           // mean elementwise KL(N(mu, sigma^2) || N(0, 1)), unweighted
    nn::Var total;        // recon_rgb + recon_depth + kl_weight * kl
};

struct AeLossValues {
    real recon_rgb = 0, recon_depth = 0, kl = 0, total = 0;
};

AeLossTerms ae_loss(const nn::Var& x, const nn::Var& x_hat, const nn::Var& mean, const nn::Var& logvar,
                    const AeConfig& cfg);
AeLossValues ae_loss(const Tensor& x, const Tensor& x_hat, const LatentDistribution& dist, const AeConfig& cfg);

class KlAutoencoder {
public:
    KlAutoencoder(AeConfig cfg, uint64_t init_seed);

    const AeConfig& config() const { return cfg_; }
    AeConfig& config() { return cfg_; }

    // Differentiable halves; `x` is 4 x H x W, returns {mean, clamped logvar}.
    std::pair<nn::Var, nn::Var> encode_var(const nn::Var& x) const;
    nn::Var decode_var(const nn::Var& z) const;

    // Inference entry points (no tape). Validate shapes and finiteness.
    LatentDistribution encode(const Tensor& x) const;
    Tensor decode(const Latent& z) const;

    nn::NamedParams params() const;
    nn::Checkpoint to_checkpoint() const;
    static KlAutoencoder from_checkpoint(const nn::Checkpoint& ckpt);
    static KlAutoencoder load(const std::filesystem::path& path);

private:
    AeConfig cfg_;
    // encoder
    nn::Conv2d enc_in_;
    std::vector<nn::ResBlock> enc_blocks_;
    std::vector<nn::Conv2d> enc_down_;
    nn::GroupNorm enc_norm_;
    nn::Conv2d enc_out_;
    // decoder
    nn::Conv2d dec_in_;
    std::vector<nn::ResBlock> dec_blocks_;
    std::vector<nn::Conv2d> dec_up_;
    nn::GroupNorm dec_norm_;
    nn::Conv2d dec_out_;
};

inline constexpr const char* kAeCheckpointKind = "kl-autoencoder";

struct AeTrainOptions {
    int64_t steps = 2000;
    int64_t batch_size = 2;
    real lr = 2e-3;
    uint64_t seed = 0;
    // Called after every step with (1-based global step, loss values).
    std::function<void(int64_t, const AeLossValues&)> on_step;
};

struct AeTrainResult {
    std::vector<AeLossValues> history;
    int64_t final_step = 0;
    std::map<std::string, Tensor> optimizer_state;
};

// Minibatch Adam on the reconstruction + KL objective, running global steps
// start_step+1 .. start_step+steps. Minibatch draws depend only on (seed,
// step), so a resumed run sees the same data as an uninterrupted one.
// Deterministic for a given input. Throws NumericError on divergence.
AeTrainResult train_ae(KlAutoencoder& model, const std::vector<RgbdSample>& samples, const AeTrainOptions& opts,
                       const std::map<std::string, Tensor>* optimizer_state = nullptr, int64_t start_step = 0);

// 1 / std of the latent means over `samples`.
real calibrate_latent_scale(const KlAutoencoder& model, const std::vector<RgbdSample>& samples);

}  // namespace ldm3d::ae
