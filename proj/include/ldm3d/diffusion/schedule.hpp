// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "ldm3d/core/tensor.hpp"

namespace ldm3d::diffusion {

// Variance-preserving schedule. Timesteps are 1-based: t = 1..T, and
// alpha_bar(0) = 1 extends the table to the clean signal.
struct NoiseSchedule {
    int T = 0;
    std::vector<real> betas;       // betas[t-1]
    std::vector<real> alphas;      // 1 - beta
    std::vector<real> alpha_bars;  // cumulative products

    real beta(int t) const { return betas.at(static_cast<size_t>(t - 1)); }
    real alpha(int t) const { return alphas.at(static_cast<size_t>(t - 1)); }
    real alpha_bar(int t) const { return t == 0 ? 1.0 : alpha_bars.at(static_cast<size_t>(t - 1)); }
};

// Linear betas from beta_min to beta_max (inclusive).
NoiseSchedule make_schedule(int T = 1000, real beta_min = 1e-4, real beta_max = 0.02);
NoiseSchedule schedule_from_betas(std::vector<real> betas);

// z_t = sqrt(alpha_bar_t) z0 + sqrt(1 - alpha_bar_t) eps, for 0 <= t <= T.
Tensor add_noise(const Tensor& z0, int t, const Tensor& eps, const NoiseSchedule& sched);

}  // namespace ldm3d::diffusion
