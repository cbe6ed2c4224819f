// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ldm3d/nn/autograd.hpp"

// Differentiable ops. Image-like values are C x H x W (no batch axis; batches
// are formed by summing per-sample losses).
namespace ldm3d::nn {

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, real s);
Var add_scalar(const Var& a, real s);

// x: C x ..., bias: C. Adds bias[c] to every element of channel c.
Var add_channel_bias(const Var& x, const Var& bias);

Var silu(const Var& x);
Var tanh(const Var& x);
Var exp(const Var& x);
Var abs(const Var& x);
Var square(const Var& x);
// Gradient is passed only where lo < x < hi.
Var clamp(const Var& x, real lo, real hi);

Var sum(const Var& x);
Var mean(const Var& x);
Var mse(const Var& a, const Var& b);

Var reshape(const Var& x, Shape shape);
Var transpose(const Var& x);  // 2-D
Var concat_channels(const Var& a, const Var& b);
Var slice_channels(const Var& x, int64_t begin, int64_t end);

// x: N x D, w: O x D, b: O (may be undefined) -> N x O
Var linear(const Var& x, const Var& w, const Var& b);
Var matmul(const Var& a, const Var& b);     // (M x K)(K x N)
Var matmul_nt(const Var& a, const Var& b);  // (M x K)(N x K)^T
Var softmax_rows(const Var& x);             // 2-D, along last axis

// x: C x H x W, w: O x C x k x k, b: O (may be undefined); zero padding.
Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad);
Var group_norm(const Var& x, int groups, const Var& gamma, const Var& beta, real eps = 1e-5);
Var upsample_nearest2x(const Var& x);

}  // namespace ldm3d::nn
