// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>

#include "ldm3d/core/rng.hpp"
#include "ldm3d/nn/ops.hpp"

namespace ldm3d::nn {

// Largest group count <= 8 that divides `channels`.
int default_groups(int64_t channels);

struct Conv2d {
    Var weight, bias;
    int stride = 1;
    int pad = 1;

    Conv2d() = default;
    Conv2d(int64_t in, int64_t out, int k, int stride, Rng& rng, real gain = 1.0);
    Var operator()(const Var& x) const { return conv2d(x, weight, bias, stride, pad); }
    void collect(NamedParams& out, const std::string& prefix) const;
};

struct Linear {
    Var weight, bias;

    Linear() = default;
    Linear(int64_t in, int64_t out, Rng& rng, bool with_bias = true, real gain = 1.0);
    // x: N x in -> N x out
    Var operator()(const Var& x) const { return linear(x, weight, bias); }
    void collect(NamedParams& out, const std::string& prefix) const;
};

struct GroupNorm {
    Var gamma, beta;
    int groups = 1;

    GroupNorm() = default;
    explicit GroupNorm(int64_t channels);
    Var operator()(const Var& x) const { return group_norm(x, groups, gamma, beta); }
    void collect(NamedParams& out, const std::string& prefix) const;
};

// GN -> SiLU -> conv -> (+ time projection) -> GN -> SiLU -> conv, plus a
// 1x1 skip when the width changes. temb_dim = 0 disables the time input.
struct ResBlock {
    GroupNorm norm1, norm2;
    Conv2d conv1, conv2;
    std::optional<Linear> time_proj;
    std::optional<Conv2d> skip;

    ResBlock() = default;
    ResBlock(int64_t in, int64_t out, int64_t temb_dim, Rng& rng);
    // temb: 1 x temb_dim, ignored when the block has no time input.
    Var operator()(const Var& x, const Var& temb) const;
    void collect(NamedParams& out, const std::string& prefix) const;
};

// Single-head cross-attention from image tokens (queries) to a context
// sequence (keys/values), with a residual connection.
struct CrossAttention {
    GroupNorm norm;
    Linear to_q, to_k, to_v, to_out;
    int64_t channels = 0;

    CrossAttention() = default;
    CrossAttention(int64_t channels, int64_t context_dim, Rng& rng);
    // x: C x H x W, context: L x context_dim
    Var operator()(const Var& x, const Var& context) const;
    void collect(NamedParams& out, const std::string& prefix) const;
};

}  // namespace ldm3d::nn
