// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include "ldm3d/nn/layers.hpp"

#include <cmath>

namespace ldm3d::nn {

int default_groups(int64_t channels) {
    for (int g = 8; g > 1; --g)
        if (channels % g == 0) return g;
    return 1;
}

namespace {

// He-style uniform init scaled by fan-in.
Var init_weight(Shape shape, int64_t fan_in, Rng& rng, real gain) {
    Tensor w(std::move(shape));
    const real bound = gain * std::sqrt(3.0 / static_cast<real>(fan_in));
    for (auto& v : w.values()) v = rng.uniform(-bound, bound);
    return Var(std::move(w), true);
}

}  // namespace

Conv2d::Conv2d(int64_t in, int64_t out, int k, int stride_, Rng& rng, real gain)
    : weight(init_weight({out, in, k, k}, in * k * k, rng, gain)),
      bias(Tensor::zeros({out}), true),
      stride(stride_),
      pad(k / 2) {}

void Conv2d::collect(NamedParams& out, const std::string& prefix) const {
    out.emplace_back(prefix + ".weight", weight);
    out.emplace_back(prefix + ".bias", bias);
}

Linear::Linear(int64_t in, int64_t out, Rng& rng, bool with_bias, real gain)
    : weight(init_weight({out, in}, in, rng, gain)) {
    if (with_bias) bias = Var(Tensor::zeros({out}), true);
}

void Linear::collect(NamedParams& out, const std::string& prefix) const {
    out.emplace_back(prefix + ".weight", weight);
    if (bias.defined()) out.emplace_back(prefix + ".bias", bias);
}

GroupNorm::GroupNorm(int64_t channels)
    : gamma(Tensor::full({channels}, 1.0), true), beta(Tensor::zeros({channels}), true), groups(default_groups(channels)) {}

void GroupNorm::collect(NamedParams& out, const std::string& prefix) const {
    out.emplace_back(prefix + ".gamma", gamma);
    out.emplace_back(prefix + ".beta", beta);
}

ResBlock::ResBlock(int64_t in, int64_t out, int64_t temb_dim, Rng& rng)
    : norm1(in), norm2(out), conv1(in, out, 3, 1, rng), conv2(out, out, 3, 1, rng, 0.5) {
    if (temb_dim > 0) time_proj.emplace(temb_dim, out, rng);
    if (in != out) skip.emplace(in, out, 1, 1, rng);
}

Var ResBlock::operator()(const Var& x, const Var& temb) const {
    Var h = conv1(silu(norm1(x)));
    if (time_proj && temb.defined()) {
        Var t = (*time_proj)(silu(temb));
        h = add_channel_bias(h, reshape(t, {t.value().numel()}));
    }
    h = conv2(silu(norm2(h)));
    return add(skip ? (*skip)(x) : x, h);
}

void ResBlock::collect(NamedParams& out, const std::string& prefix) const {
    norm1.collect(out, prefix + ".norm1");
    conv1.collect(out, prefix + ".conv1");
    if (time_proj) time_proj->collect(out, prefix + ".time_proj");
    norm2.collect(out, prefix + ".norm2");
    conv2.collect(out, prefix + ".conv2");
    if (skip) skip->collect(out, prefix + ".skip");
}

CrossAttention::CrossAttention(int64_t ch, int64_t context_dim, Rng& rng)
    : norm(ch),
      to_q(ch, ch, rng, false),
      to_k(context_dim, ch, rng, false),
      to_v(context_dim, ch, rng, false),
      to_out(ch, ch, rng, true, 0.5),
      channels(ch) {}

Var CrossAttention::operator()(const Var& x, const Var& context) const {
    const int64_t h = x.shape()[1], w = x.shape()[2];
    Var tokens = transpose(reshape(norm(x), {channels, h * w}));  // HW x C
    Var q = to_q(tokens);
    Var k = to_k(context);
    Var v = to_v(context);
    Var attn = softmax_rows(scale(matmul_nt(q, k), 1.0 / std::sqrt(static_cast<real>(channels))));
    Var o = to_out(matmul(attn, v));  // HW x C
    return add(x, reshape(transpose(o), {channels, h, w}));
}

void CrossAttention::collect(NamedParams& out, const std::string& prefix) const {
    norm.collect(out, prefix + ".norm");
    to_q.collect(out, prefix + ".to_q");
    to_k.collect(out, prefix + ".to_k");
    to_v.collect(out, prefix + ".to_v");
    to_out.collect(out, prefix + ".to_out");
}

}  // namespace ldm3d::nn
