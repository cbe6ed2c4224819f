// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include "ldm3d/diffusion/sampler.hpp"

#include <cmath>

#include "ldm3d/core/error.hpp"
#include "ldm3d/core/json_util.hpp"
#include "ldm3d/core/rng.hpp"

namespace ldm3d::diffusion {

Tensor guided_eps(const EpsModel& model, const Tensor& z_t, int t, const TextCondition& cond, const Tensor* extra,
                  const SamplerOptions& opts) {
    Tensor eps_c = denoise_step(model, z_t, t, cond, extra);
    if (opts.guidance_scale == 1.0) return eps_c;
    if (!opts.uncond) throw ContractError("guidance_scale != 1 needs an unconditional embedding");
    const Tensor eps_u = denoise_step(model, z_t, t, *opts.uncond, extra);
    const real g = opts.guidance_scale;
    for (int64_t i = 0; i < eps_c.numel(); ++i) eps_c[i] = eps_u[i] + g * (eps_c[i] - eps_u[i]);
    return eps_c;
}

namespace {

Tensor initial_latent(const Shape& shape, Rng& rng, const SamplerOptions& opts) {
    LDM3D_REQUIRE(shape.size() == 3 && shape[0] == kLatentChannels,
                  "sampler shape must be 4 x h x w, got " + shape_str(shape));
    if (opts.initial_noise) {
        LDM3D_REQUIRE(opts.initial_noise->shape() == shape, "initial noise shape mismatch");
        return *opts.initial_noise;
    }
    return rng.normal_like(shape);
}

void check_finite(const Tensor& z, int t) {
    if (!z.all_finite()) throw NumericError("sampler produced non-finite values at t=" + std::to_string(t));
}

}  // namespace

ae::Latent sample_ddpm(const EpsModel& model, const Shape& shape, const TextCondition& cond, const Tensor* extra_latent,
                       const NoiseSchedule& sched, const SamplerOptions& opts) {
    Rng rng(opts.seed);
    Tensor x = initial_latent(shape, rng, opts);
    int index = 0;
    for (int t = sched.T; t >= 1; --t) {
        const Tensor eps = guided_eps(model, x, t, cond, extra_latent, opts);
        const real ab = sched.alpha_bar(t), ab_prev = sched.alpha_bar(t - 1);
        const real beta = sched.beta(t), alpha = sched.alpha(t);
        const real c_x0 = std::sqrt(ab_prev) * beta / (1.0 - ab);
        const real c_xt = std::sqrt(alpha) * (1.0 - ab_prev) / (1.0 - ab);
        const real sigma = t > 1 ? std::sqrt(beta * (1.0 - ab_prev) / (1.0 - ab)) : 0.0;
        const real sa = std::sqrt(ab), sb = std::sqrt(1.0 - ab);
        for (int64_t i = 0; i < x.numel(); ++i) {
            const real x0 = (x[i] - sb * eps[i]) / sa;
            x[i] = c_x0 * x0 + c_xt * x[i];
        }
        if (sigma > 0)
            for (auto& v : x.values()) v += sigma * rng.normal();
        check_finite(x, t);
        if (opts.trace) opts.trace(index, t, x);
        ++index;
    }
    return {std::move(x), true};
}

std::vector<int> ddim_timesteps(int T, int steps) {
    if (steps < 1 || steps > T)
        throw ConfigError("DDIM steps must be in [1, T=" + std::to_string(T) + "], got " + std::to_string(steps));
    std::vector<int> ts(static_cast<size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        const int64_t num = static_cast<int64_t>(i + 1) * T;
        ts[static_cast<size_t>(i)] = static_cast<int>((num + steps - 1) / steps);
    }
    return ts;
}

ae::Latent sample_ddim(const EpsModel& model, const Shape& shape, const TextCondition& cond, const Tensor* extra_latent,
                       const NoiseSchedule& sched, int steps, real eta, const SamplerOptions& opts) {
    if (!(eta >= 0.0)) throw ConfigError("DDIM eta must be nonnegative");
    const std::vector<int> ts = ddim_timesteps(sched.T, steps);
    Rng rng(opts.seed);
    Tensor x = initial_latent(shape, rng, opts);
    int index = 0;
    for (int i = steps - 1; i >= 0; --i) {
        const int t = ts[static_cast<size_t>(i)];
        const int t_prev = i > 0 ? ts[static_cast<size_t>(i - 1)] : 0;
        const Tensor eps = guided_eps(model, x, t, cond, extra_latent, opts);
        const real ab = sched.alpha_bar(t), ab_prev = sched.alpha_bar(t_prev);
        const real sigma = eta * std::sqrt((1.0 - ab_prev) / (1.0 - ab)) * std::sqrt(1.0 - ab / ab_prev);
        const real dir = std::sqrt(std::max(0.0, 1.0 - ab_prev - sigma * sigma));
        const real sa = std::sqrt(ab), sb = std::sqrt(1.0 - ab), sp = std::sqrt(ab_prev);
        for (int64_t k = 0; k < x.numel(); ++k) {
            const real x0 = (x[k] - sb * eps[k]) / sa;
            x[k] = sp * x0 + dir * eps[k];
        }
        if (sigma > 0)
            for (auto& v : x.values()) v += sigma * rng.normal();
        check_finite(x, t);
        if (opts.trace) opts.trace(index, t, x);
        ++index;
    }
    return {std::move(x), true};
}

void SamplerConfig::validate() const {
    if (kind != "ddim" && kind != "ddpm") throw ConfigError("sampler kind must be 'ddim' or 'ddpm', got '" + kind + "'");
    if (steps < 1) throw ConfigError("sampler steps must be >= 1");
    if (!(eta >= 0.0)) throw ConfigError("sampler eta must be nonnegative");
    if (!std::isfinite(guidance_scale)) throw ConfigError("guidance_scale must be finite");
}

nlohmann::json to_json(const SamplerConfig& c) {
    return {{"kind", c.kind}, {"steps", c.steps}, {"eta", c.eta}, {"guidance_scale", c.guidance_scale}};
}

SamplerConfig sampler_config_from_json(const nlohmann::json& j) {
    const std::string where = "sampler config";
    reject_unknown_keys(j, {"kind", "steps", "eta", "guidance_scale"}, where);
    SamplerConfig c;
    c.kind = get_or(j, "kind", c.kind, where);
    c.steps = get_or(j, "steps", c.steps, where);
    c.eta = get_or(j, "eta", c.eta, where);
    c.guidance_scale = get_or(j, "guidance_scale", c.guidance_scale, where);
    c.validate();
    return c;
}

ae::Latent run_sampler(const EpsModel& model, const Shape& shape, const TextCondition& cond,
                       const TextCondition& uncond, const Tensor* extra_latent, const NoiseSchedule& sched,
                       const SamplerConfig& cfg, uint64_t seed, const TraceFn& trace) {
    cfg.validate();
    SamplerOptions o;
    o.seed = seed;
    o.guidance_scale = cfg.guidance_scale;
    o.uncond = &uncond;
    o.trace = trace;
    if (cfg.kind == "ddpm") return sample_ddpm(model, shape, cond, extra_latent, sched, o);
    return sample_ddim(model, shape, cond, extra_latent, sched, cfg.steps, cfg.eta, o);
}

}  // namespace ldm3d::diffusion
