// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "ldm3d/core/error.hpp"
#include "ldm3d/data/manifest.hpp"
#include "ldm3d/eval/metrics.hpp"
#include "ldm3d/eval/providers.hpp"
#include "ldm3d/eval/report.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace ldm3d;
using namespace ldm3d::eval;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

}  // namespace

TEST_CASE("psnr") {
    const Tensor a = testing::random_tensor({3, 4, 4}, 1);
    CHECK(std::isinf(psnr(a, a, 2.0)));
    Tensor b = a;
    for (auto& v : b.values()) v += 0.1;
    CHECK(psnr(a, b, 2.0) == doctest::Approx(10 * std::log10(4.0 / 0.01)));
    CHECK_THROWS_AS(psnr(a, Tensor(Shape{3, 4, 5}), 2.0), ContractError);
}

TEST_CASE("ssim against direct summation") {
    const Tensor a = testing::random_tensor({3, 20, 17}, 1);
    CHECK(ssim(a, a) == doctest::Approx(1.0));
    Tensor b = a;
    Rng rng(2);
    for (auto& v : b.values()) v = std::clamp(v + 0.2 * rng.normal(), -1.0, 1.0);
    CHECK(std::abs(ssim(a, b) - oracle::ssim(a, b)) < 1e-6);
    SsimOptions o;
    o.window = 7;
    o.sigma = 1.0;
    CHECK(std::abs(ssim(a, b, o) - oracle::ssim(a, b, 7, 1.0)) < 1e-6);
    CHECK_THROWS_AS(ssim(Tensor(Shape{1, 8, 8}), Tensor(Shape{1, 8, 8})), DataError);
}

TEST_CASE("frechet distance against a Denman-Beavers root") {
    const auto fa = random_matrix(200, 5, 1);
    Eigen::MatrixXd fb = random_matrix(150, 5, 2) * 1.3;
    fb.col(0).array() += 0.7;
    const auto sa = feature_stats(fa), sb = feature_stats(fb);
    CHECK(std::abs(frechet_distance(sa, sb) - oracle::fid(sa.mu, sa.sigma, sb.mu, sb.sigma)) < 1e-6);
    CHECK(std::abs(frechet_distance(sa, sa)) < 1e-9);

    // Diagonal closed form.
    FeatureStats d1{Eigen::VectorXd::Zero(2), Eigen::Vector2d(1.0, 4.0).asDiagonal()};
    FeatureStats d2{Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(4.0, 9.0).asDiagonal()};
    CHECK(frechet_distance(d1, d2) == doctest::Approx(1.0 + (1 + 4 - 4) + (4 + 9 - 12)));

    // Unbiased covariance.
    Eigen::MatrixXd two(2, 1);
    two << 1, 3;
    CHECK(feature_stats(two).sigma(0, 0) == doctest::Approx(2.0));
    CHECK_THROWS(feature_stats(Eigen::MatrixXd(1, 3)));
}

TEST_CASE("inception score") {
    Eigen::MatrixXd uniform = Eigen::MatrixXd::Constant(6, 4, 0.25);
    CHECK(inception_score(uniform, 1).mean == doctest::Approx(1.0));
    Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(4, 4);
    for (int i = 0; i < 4; ++i) onehot(i, i) = 1;
    const auto s = inception_score(onehot, 1);
    CHECK(s.mean == doctest::Approx(4.0));
    CHECK(s.std == doctest::Approx(0.0));
    // Two contiguous splits: {0,1} and {2,3}, each scoring 2.
    CHECK(inception_score(onehot, 2).mean == doctest::Approx(2.0));
    CHECK_THROWS(inception_score(onehot, 5));
}

TEST_CASE("clip similarity") {
    Eigen::VectorXd a(3), b(3);
    a << 1, 2, 3;
    b << -2, 1, 0;
    CHECK(clip_similarity(a, 2 * a) == doctest::Approx(100.0));
    CHECK(clip_similarity(a, b) == doctest::Approx(0.0));
    CHECK(clip_similarity(a, -a) == doctest::Approx(-100.0));
}

TEST_CASE("scale and shift fit") {
    const auto f = fit_scale_shift({1, 2, 3}, {3, 5, 7});
    CHECK(f.scale == doctest::Approx(2.0));
    CHECK(f.shift == doctest::Approx(1.0));
    CHECK_THROWS_AS(fit_scale_shift({2, 2, 2}, {1, 2, 3}), NumericError);
}

TEST_CASE("mare") {
    Tensor ref = testing::random_tensor({1, 16, 16}, 1, 0.1, 1.0);
    Tensor pred = ref;
    for (auto& v : pred.values()) v = (v - 0.3) / 2.5;
    const auto r = mare(pred, ref, 100, 7);
    CHECK(r.value < 1e-10);
    CHECK(r.scale == doctest::Approx(2.5));
    CHECK(r.shift == doctest::Approx(0.3));

    Rng rng(3);
    for (auto& v : pred.values()) v += 0.05 * rng.normal();
    const auto noisy = mare(pred, ref, 256 * 8, 7);
    CHECK(std::abs(noisy.value - oracle::mare_all_pixels(pred, ref)) < 2e-2);
    CHECK(mare(pred, ref, 100, 7).value == mare(pred, ref, 100, 7).value);
}

TEST_CASE("percentile and filtered aggregate") {
    CHECK(percentile({1, 2, 3, 4}, 50) == doctest::Approx(2.5));
    CHECK(percentile({4, 1, 3, 2}, 90) == doctest::Approx(3.7));
    CHECK(percentile({5}, 90) == 5);
    CHECK(percentile({1, 2, 3}, 0) == 1);
    CHECK(percentile({1, 2, 3}, 100) == 3);
    CHECK_THROWS(percentile({}, 50));

    const auto a = aggregate_depth_eval({1, 2, 3, 4, 100}, 80);
    CHECK(a.threshold == doctest::Approx(23.2));
    CHECK(a.kept == 4);
    CHECK(a.filtered_mean == doctest::Approx(2.5));
    CHECK(a.mean == doctest::Approx(22.0));
    CHECK(a.filtered_std == doctest::Approx(std::sqrt(1.25)));
}

TEST_CASE("disparity and depth report") {
    const Tensor d(Shape{1, 2, 2}, -1.0);
    CHECK(to_disparity(d).max() == 0.0);
    std::vector<Tensor> ref, pred;
    std::vector<std::string> ids;
    for (int i = 0; i < 5; ++i) {
        ref.push_back(to_disparity(testing::synthetic_rgbd(8, 8, i).depth));
        Tensor p = ref.back();
        for (auto& v : p.values()) v = 0.5 * v + 0.1 + 0.01 * i * std::sin(10 * v);
        pred.push_back(p);
        ids.push_back("x" + std::to_string(i));
    }
    const auto r = evaluate_depth(pred, ref, ids, 50, 3, 90);
    CHECK(r.per_sample_mare.size() == 5);
    CHECK(r.mare_filtered_mean <= r.mare_mean + 1e-15);
    const auto j = to_json(r);
    CHECK(j.contains("mare_mean"));
}

TEST_CASE("default providers") {
    const auto p = default_providers();
    const Tensor img = testing::synthetic_rgbd(24, 40, 1).rgb;
    CHECK(thumbnail_vector(img).size() == 3 * kProjectionGrid * kProjectionGrid);
    CHECK(p.features->features(img).size() == 16);
    const auto probs = p.classifier->probs(img);
    CHECK(probs.sum() == doctest::Approx(1.0));
    CHECK(probs.minCoeff() > 0);
    CHECK(p.image_text->text("a room").size() == p.image_text->image(img).size());
    CHECK(p.features->features(img) == p.features->features(img));
}

TEST_CASE("evaluate_run end to end") {
    const auto dir = testing::scratch_dir("eval-run");
    DatasetManifest gen, ref;
    gen.height = ref.height = 16;
    gen.width = ref.width = 16;
    for (int i = 0; i < 4; ++i) {
        auto s = testing::synthetic_rgbd(16, 16, 30 + i);
        auto g = s;
        for (auto& v : g.rgb.values()) v *= 0.9;
        save_rgbd(s, dir / (s.id + "_r.png"), dir / (s.id + "_rd.png"));
        save_rgbd(g, dir / (s.id + "_g.png"), dir / (s.id + "_gd.png"));
        ref.entries.push_back({s.id, dir / (s.id + "_r.png"), dir / (s.id + "_rd.png"), s.caption});
        gen.entries.insert(gen.entries.begin(), {s.id, dir / (s.id + "_g.png"), dir / (s.id + "_gd.png"), s.caption});
    }
    write_manifest(dir / "gen.jsonl", gen);
    write_manifest(dir / "ref.jsonl", ref);
    EvalConfig cfg;
    cfg.n_points = 40;
    const auto rep = evaluate_run(dir / "gen.jsonl", dir / "ref.jsonl", cfg, default_providers());
    CHECK(rep["n_samples"] == 4);
    for (const auto& m : kAllMetrics) CHECK(rep["metrics"].contains(m));
    CHECK(rep.contains("depth"));
    CHECK(dump_report(rep) == dump_report(evaluate_run(dir / "gen.jsonl", dir / "ref.jsonl", cfg, default_providers())));

    // Same files on both sides give infinite PSNR, serialized as a string.
    const auto self = evaluate_run(dir / "ref.jsonl", dir / "ref.jsonl", cfg, default_providers());
    CHECK(dump_report(self).find("\"inf\"") != std::string::npos);

    ref.entries.pop_back();
    write_manifest(dir / "ref3.jsonl", ref);
    CHECK_THROWS_AS(evaluate_run(dir / "gen.jsonl", dir / "ref3.jsonl", cfg, default_providers()), DataError);

    cfg.metrics = {"psnr", "bogus"};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
