// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include "ldm3d/diffusion/trainer.hpp"

#include <cmath>

#include "ldm3d/core/error.hpp"
#include "ldm3d/core/rng.hpp"
#include "ldm3d/nn/optim.hpp"

namespace ldm3d::diffusion {

DiffusionTrainResult train_diffusion(UNet& model, const std::vector<DiffusionExample>& examples,
                                     const TextEncoder& text, const NoiseSchedule& sched,
                                     const DiffusionTrainOptions& opts,
                                     const std::map<std::string, Tensor>* optimizer_state, int64_t start_step) {
    if (examples.empty()) throw DataError("train_diffusion: empty training set");
    LDM3D_REQUIRE(opts.steps >= 0 && opts.batch_size >= 1, "train_diffusion: bad steps/batch size");
    if (!(opts.uncond_prob >= 0.0 && opts.uncond_prob <= 1.0))
        throw ConfigError("uncond_prob must be in [0, 1]");

    std::vector<TextCondition> conds;
    conds.reserve(examples.size());
    for (const auto& e : examples) {
        if (!e.z0.all_finite()) throw DataError("train_diffusion: non-finite latent");
        conds.push_back(embed_text(e.caption, text));
    }
    const TextCondition uncond = embed_text("", text);

    nn::Adam opt(model.params(), {.lr = opts.lr});
    if (optimizer_state) opt.load_state(*optimizer_state, start_step);
    const uint64_t data_seed = derive_seed(opts.seed, "data");
    const uint64_t noise_seed = derive_seed(opts.seed, "noise");
    const uint64_t drop_seed = derive_seed(opts.seed, "dropout");

    DiffusionTrainResult result;
    const real inv_batch = 1.0 / static_cast<real>(opts.batch_size);
    for (int64_t k = 1; k <= opts.steps; ++k) {
        const int64_t step = start_step + k;
        opt.zero_grad();
        real loss = 0;
        const auto batch = minibatch_indices(data_seed, step, opts.batch_size, examples.size());
        for (size_t b = 0; b < batch.size(); ++b) {
            const uint64_t key = static_cast<uint64_t>(step) * 1024 + b;
            const auto& ex = examples[batch[b]];
            Rng drop(derive_seed(drop_seed, key));
            const TextCondition& c = drop.uniform() < opts.uncond_prob ? uncond : conds[batch[b]];
            const Tensor* extra = ex.extra ? &*ex.extra : nullptr;
            nn::Var l = training_loss(model, ex.z0, c, extra, sched, derive_seed(noise_seed, key));
            loss += l.value()[0] * inv_batch;
            nn::backward(nn::scale(l, inv_batch));
        }
        if (!std::isfinite(loss))
            throw NumericError("diffusion training diverged at step " + std::to_string(step) + " (loss is not finite)");
        opt.step();
        result.history.push_back(loss);
        if (opts.on_step) opts.on_step(step, loss);
    }
    result.final_step = start_step + opts.steps;
    result.optimizer_state = opt.state();
    return result;
}

}  // namespace ldm3d::diffusion
