// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "ldm3d/core/error.hpp"
#include "ldm3d/diffusion/sampler.hpp"
#include "ldm3d/diffusion/trainer.hpp"
#include "support.hpp"

using namespace ldm3d;
using namespace ldm3d::diffusion;
using testing::FnEpsModel;

namespace {

// Knows the clean latent, so it predicts the exact noise.
FnEpsModel oracle_model(const Tensor& z0, const NoiseSchedule& s) {
    return FnEpsModel(4, [z0, s](const Tensor& in, int t, const TextCondition&) {
        Tensor e(z0.shape());
        const real ab = s.alpha_bar(t);
        for (int64_t i = 0; i < e.numel(); ++i) e[i] = (in[i] - std::sqrt(ab) * z0[i]) / std::sqrt(1 - ab);
        return e;
    });
}

// Smooth but nonlinear stand-in for a trained network.
FnEpsModel wobbly_model() {
    return FnEpsModel(4, [](const Tensor& in, int t, const TextCondition& c) {
        Tensor e(in.shape());
        const real k = c.tokens_embedding[0];
        for (int64_t i = 0; i < e.numel(); ++i) e[i] = 0.3 * std::sin(in[i] + 0.01 * t) + 0.1 * k;
        return e;
    });
}

DenoiserConfig small_unet(int64_t in_ch) {
    DenoiserConfig c;
    c.in_channels = in_ch;
    c.base_width = 4;
    c.context_dim = 8;
    c.attn_resolutions = {1};
    return c;
}

}  // namespace

TEST_CASE("linear schedule values") {
    const auto s = make_schedule(2, 0.1, 0.2);
    CHECK(s.T == 2);
    CHECK(s.beta(1) == doctest::Approx(0.1));
    CHECK(s.beta(2) == doctest::Approx(0.2));
    CHECK(s.alpha_bar(0) == 1.0);
    CHECK(s.alpha_bar(1) == doctest::Approx(0.9));
    CHECK(s.alpha_bar(2) == doctest::Approx(0.72));

    const auto d = make_schedule();
    CHECK(d.T == 1000);
    CHECK(d.beta(1) == doctest::Approx(1e-4));
    CHECK(d.beta(1000) == doctest::Approx(0.02));
    CHECK(d.alpha_bar(1000) < 1e-4);
    for (int t = 1; t < 1000; ++t) REQUIRE(d.alpha_bar(t + 1) < d.alpha_bar(t));

    CHECK_THROWS_AS(schedule_from_betas({0.1, 1.5}), ConfigError);
    CHECK_THROWS_AS(schedule_from_betas({}), ConfigError);
}

TEST_CASE("add_noise closed form") {
    const auto s = make_schedule(10, 0.1, 0.3);
    const Tensor z0 = testing::random_tensor({4, 2, 2}, 1), eps = testing::random_tensor({4, 2, 2}, 2);
    CHECK(add_noise(z0, 0, eps, s) == z0);
    const Tensor z = add_noise(z0, 7, eps, s);
    const real ab = s.alpha_bar(7);
    for (int64_t i = 0; i < z.numel(); ++i) CHECK(z[i] == doctest::Approx(std::sqrt(ab) * z0[i] + std::sqrt(1 - ab) * eps[i]));
    CHECK_THROWS_AS(add_noise(z0, 11, eps, s), ContractError);
    CHECK_THROWS_AS(add_noise(z0, 1, Tensor(Shape{4, 2, 3}), s), ContractError);
}

TEST_CASE("text encoder") {
    HashTextEncoder enc(8, 6);
    CHECK(tokenize("A Living-room, 2 lamps!") == std::vector<std::string>{"a", "living", "room", "2", "lamps"});
    const auto a = enc.encode("a cozy bedroom"), b = enc.encode("a cozy bedroom"), c = enc.encode("a kitchen");
    CHECK(a.tokens_embedding == b.tokens_embedding);
    CHECK(a.context_dim() == 8);
    CHECK(a.length() == 3);
    CHECK_FALSE(a.tokens_embedding == c.tokens_embedding);
    CHECK(a.provider_id == enc.id());
    CHECK(enc.encode("").length() == 1);
    CHECK(enc.encode("one two three four five six seven eight").length() == 6);
    CHECK(embed_text("x", enc).tokens_embedding == enc.encode("x").tokens_embedding);
}

TEST_CASE("channel contract") {
    HashTextEncoder enc(8);
    const auto cond = enc.encode("room");
    const Tensor z = testing::random_tensor({4, 8, 8}, 1), lr = testing::random_tensor({4, 8, 8}, 2);
    UNet sr(small_unet(8), 1), plain(small_unet(4), 1);
    CHECK(denoise_step(sr, z, 10, cond, &lr).shape() == z.shape());
    CHECK(denoise_step(plain, z, 10, cond).shape() == z.shape());
    CHECK_THROWS_AS(denoise_step(sr, z, 10, cond), ContractError);
    CHECK_THROWS_AS(denoise_step(plain, z, 10, cond, &lr), ContractError);
    const Tensor bad = testing::random_tensor({4, 4, 4}, 3);
    CHECK_THROWS_AS(denoise_step(sr, z, 10, cond, &bad), ContractError);
    CHECK_THROWS_AS(denoise_step(plain, z, 10, HashTextEncoder(5).encode("room")), ContractError);

    DenoiserConfig c = small_unet(6);
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("unet checkpoint round-trip") {
    HashTextEncoder enc(8);
    UNet m(small_unet(4), 3);
    const UNet back = UNet::from_checkpoint(m.to_checkpoint());
    const Tensor z = testing::random_tensor({4, 8, 8}, 1);
    CHECK(denoise_step(back, z, 3, enc.encode("a")) == denoise_step(m, z, 3, enc.encode("a")));
    CHECK(to_json(back.config()) == to_json(m.config()));
}

TEST_CASE("training loss with stub denoisers") {
    const auto s = make_schedule();
    HashTextEncoder enc(8);
    const Tensor z0 = testing::random_tensor({4, 32, 32}, 4);
    const auto cond = enc.encode("");
    const auto oracle = oracle_model(z0, s);
    CHECK(training_loss(oracle, z0, cond, nullptr, s, 1).value()[0] < 1e-20);
    const FnEpsModel zero(4, [](const Tensor& in, int, const TextCondition&) { return Tensor(in.shape()); });
    for (uint64_t seed : {1, 2, 3}) CHECK(std::abs(training_loss(zero, z0, cond, nullptr, s, seed).value()[0] - 1.0) < 0.1);
}

TEST_CASE("ddim timestep grid") {
    CHECK(ddim_timesteps(10, 3) == std::vector<int>{4, 7, 10});
    CHECK(ddim_timesteps(5, 5) == std::vector<int>{1, 2, 3, 4, 5});
    const auto g = ddim_timesteps(1000, 50);
    CHECK(g.front() == 20);
    CHECK(g.back() == 1000);
    CHECK_THROWS_AS(ddim_timesteps(10, 0), ConfigError);
    CHECK_THROWS_AS(ddim_timesteps(10, 11), ConfigError);
}

TEST_CASE("single-step ddpm matches the hand formula") {
    const auto s = schedule_from_betas({0.5});
    HashTextEncoder enc(4);
    const Tensor n = testing::random_tensor({4, 2, 2}, 7);
    const FnEpsModel m(4, [](const Tensor& in, int, const TextCondition&) {
        Tensor e(in.shape());
        for (int64_t i = 0; i < e.numel(); ++i) e[i] = 0.25 * in[i] + 0.1;
        return e;
    });
    SamplerOptions o;
    o.initial_noise = &n;
    const auto out = sample_ddpm(m, n.shape(), enc.encode(""), nullptr, s, o);
    CHECK(out.scale_applied);
    for (int64_t i = 0; i < n.numel(); ++i) {
        const real eps = 0.25 * n[i] + 0.1;
        CHECK(out.z[i] == doctest::Approx((n[i] - std::sqrt(0.5) * eps) / std::sqrt(0.5)).epsilon(1e-12));
    }
}

TEST_CASE("guidance combines the two branches") {
    HashTextEncoder enc(4);
    const auto cond = enc.encode("table"), uncond = enc.encode("");
    int calls = 0;
    const FnEpsModel m(4, [&calls](const Tensor& in, int, const TextCondition& c) {
        ++calls;
        return Tensor(in.shape(), c.tokens_embedding[0]);
    });
    const Tensor z(Shape{4, 2, 2});
    const real ec = cond.tokens_embedding[0], eu = uncond.tokens_embedding[0];
    SamplerOptions o;
    o.uncond = &uncond;
    for (real g : {0.0, 1.0, 2.5}) {
        o.guidance_scale = g;
        calls = 0;
        const Tensor e = guided_eps(m, z, 5, cond, nullptr, o);
        CHECK(e[3] == doctest::Approx(eu + g * (ec - eu)));
        CHECK(calls == (g == 1.0 ? 1 : 2));
    }
    o.uncond = nullptr;
    o.guidance_scale = 3;
    CHECK_THROWS(guided_eps(m, z, 5, cond, nullptr, o));
}

TEST_CASE("samplers recover the clean latent from an oracle denoiser") {
    const auto s = make_schedule();
    HashTextEncoder enc(4);
    const Tensor z0 = testing::random_tensor({4, 4, 4}, 11);
    const auto m = oracle_model(z0, s);
    SamplerOptions o;
    o.seed = 3;
    CHECK(max_abs_diff(sample_ddim(m, z0.shape(), enc.encode(""), nullptr, s, 20, 0.0, o).z, z0) < 1e-4);
    CHECK(max_abs_diff(sample_ddim(m, z0.shape(), enc.encode(""), nullptr, s, 20, 1.0, o).z, z0) < 1e-4);
    CHECK(max_abs_diff(sample_ddpm(m, z0.shape(), enc.encode(""), nullptr, s, o).z, z0) < 1e-4);
}

TEST_CASE("ddim at eta 1 and full steps follows the ddpm path") {
    const auto s = make_schedule(25, 1e-3, 0.2);
    HashTextEncoder enc(4);
    const auto m = wobbly_model();
    SamplerOptions o;
    o.seed = 17;
    std::vector<Tensor> pa, pb;
    o.trace = [&](int, int, const Tensor& z) { pa.push_back(z); };
    const auto a = sample_ddpm(m, {4, 3, 3}, enc.encode("x"), nullptr, s, o);
    o.trace = [&](int, int, const Tensor& z) { pb.push_back(z); };
    const auto b = sample_ddim(m, {4, 3, 3}, enc.encode("x"), nullptr, s, 25, 1.0, o);
    REQUIRE(pa.size() == 25);
    REQUIRE(pb.size() == 25);
    for (size_t i = 0; i < pa.size(); ++i) CHECK(max_abs_diff(pa[i], pb[i]) < 1e-9);
    CHECK(max_abs_diff(a.z, b.z) < 1e-9);
}

TEST_CASE("sampling is deterministic per seed") {
    const auto s = make_schedule(50);
    HashTextEncoder enc(4);
    const auto m = wobbly_model();
    const auto cond = enc.encode("a"), uncond = enc.encode("");
    SamplerConfig cfg;
    cfg.steps = 10;
    cfg.guidance_scale = 2;
    std::vector<int> ts;
    const auto a = run_sampler(m, {4, 2, 2}, cond, uncond, nullptr, s, cfg, 5,
                               [&](int i, int t, const Tensor&) { ts.push_back(i * 10000 + t); });
    CHECK(ts == std::vector<int>{50, 10045, 20040, 30035, 40030, 50025, 60020, 70015, 80010, 90005});
    CHECK(run_sampler(m, {4, 2, 2}, cond, uncond, nullptr, s, cfg, 5).z == a.z);
    CHECK_FALSE(run_sampler(m, {4, 2, 2}, cond, uncond, nullptr, s, cfg, 6).z == a.z);
    cfg.eta = 0.5;
    CHECK(run_sampler(m, {4, 2, 2}, cond, uncond, nullptr, s, cfg, 5).z == run_sampler(m, {4, 2, 2}, cond, uncond, nullptr, s, cfg, 5).z);
    cfg.kind = "ddpm";
    CHECK(run_sampler(m, {4, 2, 2}, cond, uncond, nullptr, s, cfg, 5).z.all_finite());
}

TEST_CASE("sampler config and numeric guards") {
    SamplerConfig c;
    c.kind = "euler";
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = SamplerConfig{};
    c.eta = -1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    nlohmann::json j = to_json(SamplerConfig{});
    CHECK(to_json(sampler_config_from_json(j)) == j);
    j["extra"] = true;
    CHECK_THROWS_AS(sampler_config_from_json(j), ConfigError);

    const auto s = make_schedule(10);
    HashTextEncoder enc(4);
    const FnEpsModel nan_model(4, [](const Tensor& in, int, const TextCondition&) {
        return Tensor(in.shape(), std::numeric_limits<real>::quiet_NaN());
    });
    CHECK_THROWS_AS(sample_ddim(nan_model, {4, 2, 2}, enc.encode(""), nullptr, s, 5, 0, {}), NumericError);
    CHECK_THROWS_AS(sample_ddim(nan_model, {3, 2, 2}, enc.encode(""), nullptr, s, 5, 0, {}), ContractError);
}

TEST_CASE("diffusion training is deterministic and resumable") {
    const auto s = make_schedule();
    HashTextEncoder enc(8);
    std::vector<DiffusionExample> ex;
    for (int i = 0; i < 3; ++i) ex.push_back({testing::random_tensor({4, 4, 4}, 40 + i), i ? "room" : "", std::nullopt});
    DiffusionTrainOptions o;
    o.steps = 4;
    o.batch_size = 2;
    o.seed = 2;
    o.uncond_prob = 0.5;
    UNet full(small_unet(4), 1), split(small_unet(4), 1);
    const auto rf = train_diffusion(full, ex, enc, s, o);
    CHECK(rf.history.size() == 4);
    o.steps = 2;
    const auto r1 = train_diffusion(split, ex, enc, s, o);
    const auto r2 = train_diffusion(split, ex, enc, s, o, &r1.optimizer_state, r1.final_step);
    CHECK(r2.final_step == 4);
    CHECK(r2.history.back() == rf.history.back());
    const Tensor z = testing::random_tensor({4, 4, 4}, 1);
    CHECK(denoise_step(split, z, 9, enc.encode("a")) == denoise_step(full, z, 9, enc.encode("a")));

    // 8-channel model without conditioning latents
    UNet sr(small_unet(8), 1);
    CHECK_THROWS_AS(train_diffusion(sr, ex, enc, s, o), ContractError);
}
