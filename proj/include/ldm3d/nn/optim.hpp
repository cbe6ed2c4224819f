// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>

#include "ldm3d/nn/autograd.hpp"

namespace ldm3d::nn {

struct AdamOptions {
    real lr = 1e-3;
    real beta1 = 0.9;
    real beta2 = 0.999;
    real eps = 1e-8;
    // Global L2 norm clip; <= 0 disables.
    real grad_clip = 1.0;
};

class Adam {
public:
    Adam(NamedParams params, AdamOptions opts);

    void zero_grad();
    // Applies one update from the accumulated gradients. Returns the global
    // gradient norm before clipping; throws NumericError if it is not finite.
    real step();

    int64_t steps_taken() const { return t_; }
    // Moments keyed "m.<param>" / "v.<param>" plus the step counter, for resume.
    std::map<std::string, Tensor> state() const;
    void load_state(const std::map<std::string, Tensor>& state, int64_t steps);

private:
    NamedParams params_;
    AdamOptions opts_;
    std::vector<Tensor> m_, v_;
    int64_t t_ = 0;
};

}  // namespace ldm3d::nn
