// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ldm3d/ae/autoencoder.hpp"
#include "ldm3d/diffusion/denoiser.hpp"

namespace ldm3d::diffusion {

// Called after each update with (update index from 0, timestep just
// processed, resulting latent).
using TraceFn = std::function<void(int, int, const Tensor&)>;

struct SamplerOptions {
    uint64_t seed = 0;
    // Classifier-free guidance: eps = eps_u + g (eps_c - eps_u). At g == 1
    // only the conditional branch is evaluated.
    real guidance_scale = 1.0;
    const TextCondition* uncond = nullptr;  // required when guidance_scale != 1
    const Tensor* initial_noise = nullptr;  // replaces the first N(0, I) draw
    TraceFn trace;
};

Tensor guided_eps(const EpsModel& model, const Tensor& z_t, int t, const TextCondition& cond, const Tensor* extra,
                  const SamplerOptions& opts);

// Ancestral sampling over t = T..1 with the posterior mean and variance
// beta_t (1 - abar_{t-1}) / (1 - abar_t). Returns a scaled latent.
ae::Latent sample_ddpm(const EpsModel& model, const Shape& shape, const TextCondition& cond, const Tensor* extra_latent,
                       const NoiseSchedule& sched, const SamplerOptions& opts);

// Evenly spaced timesteps ceil((i + 1) T / steps), i = 0..steps-1, ending at T.
std::vector<int> ddim_timesteps(int T, int steps);

// DDIM over the timestep subsequence. eta = 0 is deterministic after the
// initial draw; eta = 1 with steps = T matches the DDPM update.
ae::Latent sample_ddim(const EpsModel& model, const Shape& shape, const TextCondition& cond, const Tensor* extra_latent,
                       const NoiseSchedule& sched, int steps, real eta, const SamplerOptions& opts);

// Resolved sampler settings as they appear in run configs.
struct SamplerConfig {
    std::string kind = "ddim";  // "ddim" or "ddpm"
    int steps = 50;             // ignored by ddpm, which always runs T steps
    real eta = 0.0;
    real guidance_scale = 5.0;

    void validate() const;
};

nlohmann::json to_json(const SamplerConfig& c);
SamplerConfig sampler_config_from_json(const nlohmann::json& j);

// Dispatches on cfg.kind. The unconditional embedding is only consulted when
// guidance_scale != 1.
ae::Latent run_sampler(const EpsModel& model, const Shape& shape, const TextCondition& cond,
                       const TextCondition& uncond, const Tensor* extra_latent, const NoiseSchedule& sched,
                       const SamplerConfig& cfg, uint64_t seed, const TraceFn& trace = {});

}  // namespace ldm3d::diffusion
