// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ldm3d/diffusion/denoiser.hpp"

namespace ldm3d::diffusion {

struct DiffusionExample {
    Tensor z0;                    // scaled latent, 4 x h x w
    std::string caption;
    std::optional<Tensor> extra;  // conditioning latent for 8-channel models
};

struct DiffusionTrainOptions {
    int64_t steps = 3000;
    int64_t batch_size = 8;
    real lr = 1e-3;
    uint64_t seed = 0;
    // Probability of replacing a caption by "" during training.
    real uncond_prob = 0.1;
    std::function<void(int64_t, real)> on_step;
};

struct DiffusionTrainResult {
    std::vector<real> history;
    int64_t final_step = 0;
    std::map<std::string, Tensor> optimizer_state;
};

// Adam on the epsilon-prediction loss, global steps start_step+1 ..
// start_step+steps, with the same resume semantics as train_ae.
DiffusionTrainResult train_diffusion(UNet& model, const std::vector<DiffusionExample>& examples,
                                     const TextEncoder& text, const NoiseSchedule& sched,
                                     const DiffusionTrainOptions& opts,
                                     const std::map<std::string, Tensor>* optimizer_state = nullptr,
                                     int64_t start_step = 0);

}  // namespace ldm3d::diffusion
