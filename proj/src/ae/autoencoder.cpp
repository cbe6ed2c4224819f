// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include "ldm3d/ae/autoencoder.hpp"

#include <cmath>

#include "ldm3d/core/error.hpp"
#include "ldm3d/core/json_util.hpp"
#include "ldm3d/core/rng.hpp"
#include "ldm3d/nn/optim.hpp"

namespace ldm3d::ae {

using nn::Var;

void AeConfig::validate() const {
    if (base_channels < 1) throw ConfigError("autoencoder base_channels must be >= 1");
    if (channel_multipliers.size() != 3)
        throw ConfigError("autoencoder needs exactly 3 downsampling stages (factor 8), got " +
                          std::to_string(channel_multipliers.size()));
    for (auto m : channel_multipliers)
        if (m < 1) throw ConfigError("autoencoder channel multipliers must be >= 1");
    if (!(kl_weight >= 0)) throw ConfigError("kl_weight must be nonnegative");
    if (!(recon_rgb_weight >= 0) || !(recon_depth_weight >= 0)) throw ConfigError("recon weights must be nonnegative");
    if (!(latent_scale > 0) || !std::isfinite(latent_scale)) throw ConfigError("latent_scale must be positive");
}

nlohmann::json to_json(const AeConfig& c) {
    return {{"base_channels", c.base_channels},
            {"channel_multipliers", c.channel_multipliers},
            {"kl_weight", c.kl_weight},
            {"recon_weights", {{"rgb", c.recon_rgb_weight}, {"depth", c.recon_depth_weight}}},
            {"latent_scale", c.latent_scale}};
}

AeConfig ae_config_from_json(const nlohmann::json& j) {
    const std::string where = "autoencoder config";
    reject_unknown_keys(j, {"base_channels", "channel_multipliers", "kl_weight", "recon_weights", "latent_scale"}, where);
    AeConfig c;
    c.base_channels = get_or(j, "base_channels", c.base_channels, where);
    c.channel_multipliers = get_or(j, "channel_multipliers", c.channel_multipliers, where);
    c.kl_weight = get_or(j, "kl_weight", c.kl_weight, where);
    c.latent_scale = get_or(j, "latent_scale", c.latent_scale, where);
    if (auto it = j.find("recon_weights"); it != j.end()) {
        reject_unknown_keys(*it, {"rgb", "depth"}, where + ".recon_weights");
        c.recon_rgb_weight = get_or(*it, "rgb", c.recon_rgb_weight, where);
        c.recon_depth_weight = get_or(*it, "depth", c.recon_depth_weight, where);
    }
    c.validate();
    return c;
}

Latent sample_latent(const LatentDistribution& dist, uint64_t seed, real latent_scale, bool apply_scale) {
    LDM3D_REQUIRE(dist.mean.shape() == dist.logvar.shape(), "latent mean/logvar shapes differ");
    Rng rng(seed);
    Latent out{Tensor(dist.mean.shape()), apply_scale};
    const real s = apply_scale ? latent_scale : 1.0;
    for (int64_t i = 0; i < out.z.numel(); ++i) {
        const real lv = std::clamp(dist.logvar[i], kLogvarMin, kLogvarMax);
        out.z[i] = s * (dist.mean[i] + std::exp(0.5 * lv) * rng.normal());
    }
    return out;
}

AeLossTerms ae_loss(const Var& x, const Var& x_hat, const Var& mean, const Var& logvar, const AeConfig& cfg) {
    LDM3D_REQUIRE(x.shape() == x_hat.shape(), "ae_loss: x and x_hat shapes differ");
    LDM3D_REQUIRE(x.shape().size() == 3 && x.shape()[0] == kImageChannels, "ae_loss expects 4 x H x W inputs");
    LDM3D_REQUIRE(mean.shape() == logvar.shape(), "ae_loss: mean/logvar shapes differ");
    AeLossTerms t;
    Var diff = nn::abs(nn::sub(x_hat, x));
    t.recon_rgb = nn::scale(nn::mean(nn::slice_channels(diff, 0, 3)), cfg.recon_rgb_weight);
    t.recon_depth = nn::scale(nn::mean(nn::slice_channels(diff, 3, 4)), cfg.recon_depth_weight);
    // 0.5 * (mu^2 + sigma^2 - 1 - log sigma^2)
    Var kl_el = nn::sub(nn::add(nn::square(mean), nn::exp(logvar)), logvar);
    t.kl = nn::scale(nn::add_scalar(nn::mean(kl_el), -1.0), 0.5);
    t.total = nn::add(nn::add(t.recon_rgb, t.recon_depth), nn::scale(t.kl, cfg.kl_weight));
    return t;
}

AeLossValues ae_loss(const Tensor& x, const Tensor& x_hat, const LatentDistribution& dist, const AeConfig& cfg) {
    nn::NoGradGuard ng;
    auto t = ae_loss(Var(x), Var(x_hat), Var(dist.mean), Var(dist.logvar), cfg);
    return {t.recon_rgb.value()[0], t.recon_depth.value()[0], t.kl.value()[0], t.total.value()[0]};
}

KlAutoencoder::KlAutoencoder(AeConfig cfg, uint64_t init_seed) : cfg_(std::move(cfg)) {
    cfg_.validate();
    Rng rng(init_seed);
    const auto& mult = cfg_.channel_multipliers;
    const int64_t c0 = cfg_.base_channels;

    int64_t ch = c0 * mult[0];
    enc_in_ = nn::Conv2d(kImageChannels, ch, 3, 1, rng);
    for (auto m : mult) {
        const int64_t out = c0 * m;
        enc_blocks_.emplace_back(ch, out, 0, rng);
        enc_down_.emplace_back(out, out, 3, 2, rng);
        ch = out;
    }
    enc_norm_ = nn::GroupNorm(ch);
    enc_out_ = nn::Conv2d(ch, 2 * kLatentChannels, 3, 1, rng);

    dec_in_ = nn::Conv2d(kLatentChannels, ch, 3, 1, rng);
    for (auto it = mult.rbegin(); it != mult.rend(); ++it) {
        const int64_t out = c0 * *it;
        dec_blocks_.emplace_back(ch, out, 0, rng);
        dec_up_.emplace_back(out, out, 3, 1, rng);
        ch = out;
    }
    dec_norm_ = nn::GroupNorm(ch);
    dec_out_ = nn::Conv2d(ch, kImageChannels, 3, 1, rng);
}

std::pair<Var, Var> KlAutoencoder::encode_var(const Var& x) const {
    Var h = enc_in_(x);
    for (size_t i = 0; i < enc_blocks_.size(); ++i) h = enc_down_[i](enc_blocks_[i](h, Var()));
    Var moments = enc_out_(nn::silu(enc_norm_(h)));
    return {nn::slice_channels(moments, 0, kLatentChannels),
            nn::clamp(nn::slice_channels(moments, kLatentChannels, 2 * kLatentChannels), kLogvarMin, kLogvarMax)};
}

Var KlAutoencoder::decode_var(const Var& z) const {
    Var h = dec_in_(z);
    for (size_t i = 0; i < dec_blocks_.size(); ++i) h = dec_up_[i](nn::upsample_nearest2x(dec_blocks_[i](h, Var())));
    return nn::tanh(dec_out_(nn::silu(dec_norm_(h))));
}

LatentDistribution KlAutoencoder::encode(const Tensor& x) const {
    LDM3D_REQUIRE(x.rank() == 3 && x.channels() == kImageChannels,
                  "encode expects a 4 x H x W tensor, got " + shape_str(x.shape()));
    LDM3D_REQUIRE(x.height() % kAeDownsample == 0 && x.width() % kAeDownsample == 0,
                  "encode: resolution " + shape_str(x.shape()) + " is not divisible by 8");
    if (!x.all_finite()) throw NumericError("encode: input contains non-finite values");
    nn::NoGradGuard ng;
    auto [m, lv] = encode_var(Var(x));
    return {m.value(), lv.value()};
}

Tensor KlAutoencoder::decode(const Latent& z) const {
    LDM3D_REQUIRE(z.z.rank() == 3 && z.z.channels() == kLatentChannels,
                  "decode expects a 4-channel latent, got " + shape_str(z.z.shape()));
    if (!z.z.all_finite()) throw NumericError("decode: latent contains non-finite values");
    nn::NoGradGuard ng;
    Tensor in = z.z;
    if (z.scale_applied)
        for (auto& v : in.values()) v /= cfg_.latent_scale;
    return decode_var(Var(std::move(in))).value();
}

nn::NamedParams KlAutoencoder::params() const {
    nn::NamedParams out;
    enc_in_.collect(out, "encoder.conv_in");
    for (size_t i = 0; i < enc_blocks_.size(); ++i) {
        enc_blocks_[i].collect(out, "encoder.block" + std::to_string(i));
        enc_down_[i].collect(out, "encoder.down" + std::to_string(i));
    }
    enc_norm_.collect(out, "encoder.norm_out");
    enc_out_.collect(out, "encoder.conv_out");
    dec_in_.collect(out, "decoder.conv_in");
    for (size_t i = 0; i < dec_blocks_.size(); ++i) {
        dec_blocks_[i].collect(out, "decoder.block" + std::to_string(i));
        dec_up_[i].collect(out, "decoder.up" + std::to_string(i));
    }
    dec_norm_.collect(out, "decoder.norm_out");
    dec_out_.collect(out, "decoder.conv_out");
    return out;
}

nn::Checkpoint KlAutoencoder::to_checkpoint() const {
    nn::Checkpoint c;
    c.kind = kAeCheckpointKind;
    c.config = to_json(cfg_);
    nn::store_params(c, params(), "model.");
    return c;
}

KlAutoencoder KlAutoencoder::from_checkpoint(const nn::Checkpoint& ckpt) {
    if (ckpt.kind != kAeCheckpointKind)
        throw DataError("expected a " + std::string(kAeCheckpointKind) + " checkpoint, got '" + ckpt.kind + "'");
    KlAutoencoder m(ae_config_from_json(ckpt.config), 0);
    auto p = m.params();
    nn::restore_params(ckpt, p, "model.");
    return m;
}

KlAutoencoder KlAutoencoder::load(const std::filesystem::path& path) { return from_checkpoint(nn::load_checkpoint(path)); }

AeTrainResult train_ae(KlAutoencoder& model, const std::vector<RgbdSample>& samples, const AeTrainOptions& opts,
                       const std::map<std::string, Tensor>* optimizer_state, int64_t start_step) {
    if (samples.empty()) throw DataError("train_ae: empty training set");
    LDM3D_REQUIRE(opts.steps >= 0 && opts.batch_size >= 1, "train_ae: bad steps/batch size");
    std::vector<Tensor> inputs;
    inputs.reserve(samples.size());
    for (const auto& s : samples) {
        validate(s);
        inputs.push_back(merge_channels(s));
    }

    nn::Adam opt(model.params(), {.lr = opts.lr});
    if (optimizer_state) opt.load_state(*optimizer_state, start_step);
    const uint64_t data_seed = derive_seed(opts.seed, "data");
    const uint64_t noise_seed = derive_seed(opts.seed, "noise");

    AeTrainResult result;
    const real inv_batch = 1.0 / static_cast<real>(opts.batch_size);
    for (int64_t k = 1; k <= opts.steps; ++k) {
        const int64_t step = start_step + k;
        opt.zero_grad();
        AeLossValues acc;
        const auto batch = minibatch_indices(data_seed, step, opts.batch_size, inputs.size());
        for (size_t b = 0; b < batch.size(); ++b) {
            Var x(inputs[batch[b]]);
            auto [mean, logvar] = model.encode_var(x);
            Rng rng(derive_seed(noise_seed, static_cast<uint64_t>(step) * 1024 + b));
            Var eps(rng.normal_like(mean.shape()));
            Var z = nn::add(mean, nn::mul(nn::exp(nn::scale(logvar, 0.5)), eps));
            Var x_hat = model.decode_var(z);
            auto t = ae_loss(x, x_hat, mean, logvar, model.config());
            acc.recon_rgb += t.recon_rgb.value()[0] * inv_batch;
            acc.recon_depth += t.recon_depth.value()[0] * inv_batch;
            acc.kl += t.kl.value()[0] * inv_batch;
            acc.total += t.total.value()[0] * inv_batch;
            nn::backward(nn::scale(t.total, inv_batch));
        }
        if (!std::isfinite(acc.total))
            throw NumericError("autoencoder training diverged at step " + std::to_string(step) + " (loss is not finite)");
        opt.step();
        result.history.push_back(acc);
        if (opts.on_step) opts.on_step(step, acc);
    }
    result.final_step = start_step + opts.steps;
    result.optimizer_state = opt.state();
    return result;
}

real calibrate_latent_scale(const KlAutoencoder& model, const std::vector<RgbdSample>& samples) {
    LDM3D_REQUIRE(!samples.empty(), "calibrate_latent_scale: no samples");
    real s = 0, ss = 0;
    int64_t n = 0;
    for (const auto& smp : samples) {
        const auto d = model.encode(merge_channels(smp));
        for (real v : d.mean.values()) {
            s += v;
            ss += v * v;
            ++n;
        }
    }
    const real mu = s / static_cast<real>(n);
    const real var = ss / static_cast<real>(n) - mu * mu;
    if (!(var > 1e-12)) throw NumericError("latent variance is degenerate; cannot calibrate latent_scale");
    return 1.0 / std::sqrt(var);
}

}  // namespace ldm3d::ae
