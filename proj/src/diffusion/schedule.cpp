// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include "ldm3d/diffusion/schedule.hpp"

#include <cmath>
#include <string>

#include "ldm3d/core/error.hpp"

namespace ldm3d::diffusion {

NoiseSchedule schedule_from_betas(std::vector<real> betas) {
    if (betas.empty()) throw ConfigError("noise schedule needs T >= 1");
    NoiseSchedule s;
    s.T = static_cast<int>(betas.size());
    real prod = 1.0;
    for (real b : betas) {
        if (!(b > 0.0 && b < 1.0)) throw ConfigError("every beta must lie in (0, 1), got " + std::to_string(b));
        s.alphas.push_back(1.0 - b);
        prod *= 1.0 - b;
        s.alpha_bars.push_back(prod);
    }
    s.betas = std::move(betas);
    return s;
}

NoiseSchedule make_schedule(int T, real beta_min, real beta_max) {
    if (T < 1) throw ConfigError("noise schedule needs T >= 1");
    if (!(beta_min > 0.0 && beta_min <= beta_max && beta_max < 1.0))
        throw ConfigError("noise schedule needs 0 < beta_min <= beta_max < 1");
    std::vector<real> betas(static_cast<size_t>(T));
    for (int i = 0; i < T; ++i)
        betas[static_cast<size_t>(i)] = T == 1 ? beta_min : beta_min + (beta_max - beta_min) * i / (T - 1);
    return schedule_from_betas(std::move(betas));
}

Tensor add_noise(const Tensor& z0, int t, const Tensor& eps, const NoiseSchedule& sched) {
    LDM3D_REQUIRE(z0.shape() == eps.shape(), "add_noise: z0 and eps shapes differ");
    LDM3D_REQUIRE(t >= 0 && t <= sched.T, "add_noise: timestep " + std::to_string(t) + " outside [0, " +
                                              std::to_string(sched.T) + "]");
    const real ab = sched.alpha_bar(t);
    const real a = std::sqrt(ab), b = std::sqrt(1.0 - ab);
    Tensor out(z0.shape());
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = a * z0[i] + b * eps[i];
    return out;
}

}  // namespace ldm3d::diffusion
