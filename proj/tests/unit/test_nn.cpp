// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <fstream>

#include "doctest.h"
#include "gradcheck.hpp"
#include "ldm3d/core/error.hpp"
#include "ldm3d/nn/checkpoint.hpp"
#include "ldm3d/nn/layers.hpp"
#include "ldm3d/nn/optim.hpp"
#include "support.hpp"

using namespace ldm3d;
using nn::Var;

namespace {

Var param(const Shape& s, uint64_t seed, real lo = -1, real hi = 1) {
    return Var(testing::random_tensor(s, seed, lo, hi), true);
}

// Weighted sum so every output element gets a distinct upstream gradient.
Var probe(const Var& y, uint64_t seed = 99) {
    return nn::sum(nn::mul(y, Var(testing::random_tensor(y.shape(), seed))));
}

void expect_grads(const nn::NamedParams& p, const std::function<Var()>& f) {
    const auto r = testing::grad_check(p, f);
    CAPTURE(r.rel_error);
    CAPTURE(r.max_abs);
    CHECK(r.rel_error < 1e-6);
}

}  // namespace

TEST_CASE("elementwise op gradients") {
    Var a = param({2, 3, 4}, 1), b = param({2, 3, 4}, 2, 0.5, 1.5), bias = param({2}, 3);
    nn::NamedParams p{{"a", a}, {"b", b}, {"bias", bias}};
    expect_grads(p, [&] { return probe(nn::mul(nn::add(a, b), nn::sub(a, b))); });
    expect_grads(p, [&] { return probe(nn::silu(nn::scale(a, 1.7))); });
    expect_grads(p, [&] { return probe(nn::tanh(nn::add_scalar(a, 0.2))); });
    expect_grads(p, [&] { return probe(nn::exp(a)); });
    expect_grads(p, [&] { return probe(nn::square(nn::add_channel_bias(a, bias))); });
    // abs and clamp away from their kinks
    expect_grads({{"b", b}}, [&] { return probe(nn::abs(b)); });
    expect_grads({{"a", a}}, [&] { return probe(nn::clamp(a, -2, 2)); });
    expect_grads(p, [&] { return nn::mse(a, b); });
    expect_grads(p, [&] { return nn::mean(nn::mul(a, b)); });
}

TEST_CASE("shape op gradients") {
    Var a = param({2, 3, 4}, 4), b = param({3, 3, 4}, 5);
    nn::NamedParams p{{"a", a}, {"b", b}};
    expect_grads(p, [&] { return probe(nn::concat_channels(a, b)); });
    expect_grads(p, [&] { return probe(nn::slice_channels(nn::concat_channels(a, b), 1, 4)); });
    expect_grads(p, [&] { return probe(nn::transpose(nn::reshape(a, {6, 4}))); });
    expect_grads(p, [&] { return probe(nn::upsample_nearest2x(b)); });
}

TEST_CASE("matrix op gradients") {
    Var x = param({5, 3}, 6), w = param({4, 3}, 7), bias = param({4}, 8), m = param({3, 6}, 9);
    nn::NamedParams p{{"x", x}, {"w", w}, {"bias", bias}, {"m", m}};
    expect_grads(p, [&] { return probe(nn::linear(x, w, bias)); });
    expect_grads(p, [&] { return probe(nn::linear(x, w, Var())); });
    expect_grads(p, [&] { return probe(nn::matmul(x, m)); });
    expect_grads(p, [&] { return probe(nn::matmul_nt(x, w)); });
    expect_grads(p, [&] { return probe(nn::softmax_rows(nn::matmul_nt(x, w))); });
}

TEST_CASE("conv and group norm gradients") {
    Var x = param({3, 7, 6}, 10), w = param({4, 3, 3, 3}, 11), b = param({4}, 12);
    nn::NamedParams p{{"x", x}, {"w", w}, {"b", b}};
    for (int stride : {1, 2})
        for (int pad : {0, 1}) {
            CAPTURE(stride);
            CAPTURE(pad);
            expect_grads(p, [&] { return probe(nn::conv2d(x, w, b, stride, pad)); });
        }
    Var y = param({4, 5, 5}, 13), g = param({4}, 14), be = param({4}, 15);
    expect_grads({{"y", y}, {"g", g}, {"be", be}}, [&] { return probe(nn::group_norm(y, 2, g, be)); });
}

TEST_CASE("conv matches a direct loop") {
    const Tensor x = testing::random_tensor({2, 5, 6}, 20), w = testing::random_tensor({3, 2, 3, 3}, 21);
    const Tensor out = nn::conv2d(Var(x), Var(w), Var(), 1, 1).value();
    REQUIRE(out.shape() == Shape{3, 5, 6});
    double err = 0;
    for (int o = 0; o < 3; ++o)
        for (int y = 0; y < 5; ++y)
            for (int xx = 0; xx < 6; ++xx) {
                double acc = 0;
                for (int c = 0; c < 2; ++c)
                    for (int i = 0; i < 3; ++i)
                        for (int j = 0; j < 3; ++j) {
                            const int yy = y + i - 1, xj = xx + j - 1;
                            if (yy < 0 || yy >= 5 || xj < 0 || xj >= 6) continue;
                            acc += w[((o * 2 + c) * 3 + i) * 3 + j] * x.at(c, yy, xj);
                        }
                err = std::max(err, std::abs(acc - out.at(o, y, xx)));
            }
    CHECK(err < 1e-12);
}

TEST_CASE("layer gradients") {
    Rng rng(3);
    nn::ResBlock rb(2, 4, 3, rng);
    nn::CrossAttention attn(4, 3, rng);
    nn::NamedParams p;
    rb.collect(p, "rb");
    attn.collect(p, "attn");
    const Var x(testing::random_tensor({2, 4, 4}, 30)), temb(testing::random_tensor({1, 3}, 31)),
        ctx(testing::random_tensor({5, 3}, 32));
    expect_grads(p, [&] { return probe(attn(rb(x, temb), ctx)); });
}

TEST_CASE("no-grad mode records nothing") {
    Var a = param({3}, 1);
    Var y;
    {
        nn::NoGradGuard ng;
        CHECK_FALSE(nn::grad_enabled());
        y = nn::square(a);
    }
    CHECK(nn::grad_enabled());
    CHECK_FALSE(y.requires_grad());
}

TEST_CASE("adam minimises a quadratic") {
    Var x = param({4}, 2, -3, 3);
    const Tensor target = testing::random_tensor({4}, 3);
    nn::Adam opt({{"x", x}}, {.lr = 0.05});
    for (int i = 0; i < 500; ++i) {
        opt.zero_grad();
        nn::backward(nn::mse(x, Var(target)));
        opt.step();
    }
    CHECK(opt.steps_taken() == 500);
    CHECK(max_abs_diff(x.value(), target) < 1e-3);
}

TEST_CASE("adam state round-trips and resumes identically") {
    auto run = [](int n1, int n2, bool split) {
        Var x = param({3}, 5);
        nn::Adam opt({{"x", x}}, {.lr = 0.1});
        auto go = [&](nn::Adam& o, int n) {
            for (int i = 0; i < n; ++i) {
                o.zero_grad();
                nn::backward(nn::sum(nn::square(nn::add_scalar(x, -0.5))));
                o.step();
            }
        };
        go(opt, n1);
        if (split) {
            nn::Adam resumed({{"x", x}}, {.lr = 0.1});
            resumed.load_state(opt.state(), opt.steps_taken());
            go(resumed, n2);
        } else {
            go(opt, n2);
        }
        return x.value();
    };
    CHECK(run(7, 5, false) == run(7, 5, true));
}

TEST_CASE("adam rejects non-finite gradients") {
    Var x = param({2}, 1);
    nn::Adam opt({{"x", x}}, {});
    nn::backward(nn::scale(nn::sum(x), std::numeric_limits<double>::infinity()));
    CHECK_THROWS_AS(opt.step(), NumericError);
}

TEST_CASE("checkpoint round-trip is exact and byte-stable") {
    const auto dir = testing::scratch_dir("ckpt");
    nn::Checkpoint c;
    c.kind = "test";
    c.step = 17;
    c.config = {{"width", 3}};
    c.tensors["model.b"] = testing::random_tensor({2, 3}, 1);
    c.tensors["model.a"] = testing::random_tensor({4}, 2);
    nn::save_checkpoint(dir / "a.ckpt", c);
    const auto back = nn::load_checkpoint(dir / "a.ckpt");
    CHECK(back.kind == "test");
    CHECK(back.step == 17);
    CHECK(back.config == c.config);
    CHECK(back.tensors == c.tensors);
    nn::save_checkpoint(dir / "b.ckpt", back);
    CHECK(testing::read_bytes(dir / "a.ckpt") == testing::read_bytes(dir / "b.ckpt"));
}

TEST_CASE("corrupt checkpoints are rejected") {
    const auto dir = testing::scratch_dir("ckpt-bad");
    nn::Checkpoint c;
    c.kind = "test";
    c.tensors["x"] = testing::random_tensor({8}, 1);
    nn::save_checkpoint(dir / "ok.ckpt", c);
    const std::string bytes = testing::read_bytes(dir / "ok.ckpt");

    std::ofstream(dir / "trunc.ckpt", std::ios::binary) << bytes.substr(0, bytes.size() - 5);
    CHECK_THROWS_AS(nn::load_checkpoint(dir / "trunc.ckpt"), DataError);
    std::string bad = bytes;
    bad[0] = 'X';
    std::ofstream(dir / "magic.ckpt", std::ios::binary) << bad;
    CHECK_THROWS_AS(nn::load_checkpoint(dir / "magic.ckpt"), DataError);
    CHECK_THROWS_AS(nn::load_checkpoint(dir / "missing.ckpt"), DataError);

    Var wrong(Tensor(Shape{9}), true);
    nn::NamedParams p{{"x", wrong}};
    CHECK_THROWS_AS(nn::restore_params(c, p), DataError);
}
