// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>

#include "cli_pipeline.hpp"
#include "doctest.h"
#include "json.hpp"
#include "ldm3d/core/error.hpp"

using namespace ldm3d;
using testing::run_cli;
namespace fs = std::filesystem;

namespace {

std::vector<nlohmann::json> read_jsonl(const fs::path& p) {
    std::vector<nlohmann::json> out;
    std::ifstream f(p);
    for (std::string line; std::getline(f, line);)
        if (!line.empty()) out.push_back(nlohmann::json::parse(line));
    return out;
}

}  // namespace

TEST_CASE("config parsing rejects bad input") {
    CHECK_THROWS_AS(cli::train_config_from_json({{"kind", "ae"}, {"manifest", "m"}, {"bogus", 1}}), ConfigError);
    CHECK_THROWS_AS(cli::train_config_from_json({{"kind", "gan"}, {"manifest", "m"}}), ConfigError);
    CHECK_THROWS_AS(cli::train_config_from_json({{"kind", "diffusion-sr"}, {"manifest", "m"}, {"lr_manifest", "l"},
                                                 {"ae_checkpoint", "a"}, {"denoiser", {{"in_channels", 4}}}}),
                    ConfigError);
    CHECK_THROWS_AS(cli::upscale_config_from_json({{"lr_manifest", "l"}, {"ae_checkpoint", "a"},
                                                   {"unet_checkpoint", "u"}, {"depth_lr", "d"},
                                                   {"depth_estimator", "none"}}),
                    ConfigError);
    CHECK_THROWS_AS(cli::upscale_config_from_json({{"lr_manifest", "l"}, {"ae_checkpoint", "a"},
                                                   {"unet_checkpoint", "u"}, {"depth_lr", "o"}}),
                    ConfigError);
    CHECK_THROWS_AS(cli::evaluate_config_from_json({{"generated", "g"}, {"reference", "r"}, {"percentile", 140}}),
                    ConfigError);

    const auto t = cli::train_config_from_json({{"kind", "diffusion-sr"}, {"manifest", "m"}, {"lr_manifest", "l"},
                                                {"ae_checkpoint", "a"}});
    CHECK(t.denoiser.in_channels == 8);
    CHECK(t.steps == 3000);
    CHECK(cli::to_json(cli::train_config_from_json(cli::to_json(t))) == cli::to_json(t));
    const auto a = cli::train_config_from_json({{"kind", "ae"}, {"manifest", "m"}});
    CHECK(a.steps == 2000);
    CHECK(a.batch_size == 2);
}

TEST_CASE("exit codes") {
    const auto dir = testing::scratch_dir("cli-exit");
    CHECK(run_cli({}) == cli::kExitConfig);
    CHECK(run_cli({"frobnicate"}) == cli::kExitConfig);
    CHECK(run_cli({"degrade", "--seed", "abc"}) == cli::kExitConfig);
    CHECK(run_cli({"degrade", "--out", (dir / "d").string()}) == cli::kExitConfig);  // no manifest
    CHECK(run_cli({"degrade", "--manifest", (dir / "nope.jsonl").string(), "--out", (dir / "d").string()}) ==
          cli::kExitData);
    std::ofstream(dir / "bad.json") << "{not json";
    CHECK(run_cli({"evaluate", "--config", (dir / "bad.json").string()}) == cli::kExitConfig);
    CHECK(run_cli({"prepare-pano", "--hdr-dir", (dir / "empty").string(), "--out", (dir / "p").string()}) ==
          cli::kExitData);
}

TEST_CASE("default output root comes from the environment") {
    ::setenv(cli::kOutputRootEnv, "/tmp/ldm3d-root", 1);
    CHECK(cli::default_output_dir("train") == fs::path("/tmp/ldm3d-root/train"));
    ::unsetenv(cli::kOutputRootEnv);
    CHECK(cli::default_output_dir("train") == fs::path("ldm3d-out/train"));
}

TEST_CASE("pipeline runs, resumes and reruns from its resolved config") {
    const auto root = testing::scratch_dir("cli-pipe");
    for (const auto& [name, code] : testing::run_pipeline(root)) {
        CAPTURE(name);
        CHECK(code == 0);
    }
    CHECK(fs::exists(root / "sample/pano_001_rgb.png"));
    CHECK(fs::exists(root / "sample/trace_pano_000/step_003.ckpt"));
    CHECK(fs::exists(root / "eval/report.json"));
    const auto meta = nlohmann::json::parse(testing::read_bytes(root / "up" / "room_0_a0_meta.json"));
    CHECK(meta.dump().find("\"B\"") != std::string::npos);

    // Resume continues the step numbering.
    CHECK(run_cli({"train", "--config", (root / "ae_cfg.json").string(), "--kind", "ae", "--manifest",
                   (root / "prep/manifest.jsonl").string(), "--steps", "2", "--seed", "5", "--resume",
                   (root / "ae/checkpoint.ckpt").string(), "--out", (root / "ae2").string()}) == 0);
    const auto log = read_jsonl(root / "ae2/loss_log.jsonl");
    REQUIRE(log.size() == 2);
    CHECK(log[0]["step"] == 5);
    CHECK(log[1]["step"] == 6);
    CHECK(nn::load_checkpoint(root / "ae2/checkpoint.ckpt").step == 6);

    // Continuing 4 + 2 steps equals 6 uninterrupted steps.
    CHECK(run_cli({"train", "--config", (root / "ae_cfg.json").string(), "--kind", "ae", "--manifest",
                   (root / "prep/manifest.jsonl").string(), "--steps", "6", "--seed", "5", "--out",
                   (root / "ae6").string()}) == 0);
    const auto c2 = nn::load_checkpoint(root / "ae2/checkpoint.ckpt"), c6 = nn::load_checkpoint(root / "ae6/checkpoint.ckpt");
    CHECK(c2.tensors == c6.tensors);

    // A resolved config reproduces its run.
    const auto before = testing::read_bytes(root / "up/manifest.jsonl");
    const auto rgb_before = testing::read_bytes(root / "up/room_1_a1_rgb.png");
    const auto cfg = root / "up_cfg.json";
    fs::copy_file(root / "up" / cli::kResolvedConfigName, cfg);
    fs::remove_all(root / "up");
    CHECK(run_cli({"upscale", "--config", cfg.string()}) == 0);
    CHECK(testing::read_bytes(root / "up/manifest.jsonl") == before);
    CHECK(testing::read_bytes(root / "up/room_1_a1_rgb.png") == rgb_before);

    // Wrong channel count for the task: config error, nothing written.
    CHECK(run_cli({"train", "--config", (root / "unet_cfg.json").string(), "--kind", "diffusion-sr", "--manifest",
                   (root / "prep/manifest.jsonl").string(), "--lr-manifest", (root / "deg/manifest.jsonl").string(),
                   "--ae-checkpoint", (root / "ae/checkpoint.ckpt").string(), "--in-channels", "4", "--out",
                   (root / "bad").string()}) == cli::kExitConfig);
    CHECK_FALSE(fs::exists(root / "bad"));
    // Low-resolution manifests load, but cannot be used to train the autoencoder.
    CHECK(run_cli({"train", "--config", (root / "ae_cfg.json").string(), "--kind", "ae", "--manifest",
                   (root / "deg/manifest.jsonl").string(), "--steps", "1", "--out", (root / "bad3").string()}) ==
          cli::kExitData);
    // A 4-channel checkpoint cannot drive upscaling.
    CHECK(run_cli({"upscale", "--lr-manifest", (root / "deg/manifest.jsonl").string(), "--ae-checkpoint",
                   (root / "ae/checkpoint.ckpt").string(), "--unet-checkpoint", (root / "pano/checkpoint.ckpt").string(),
                   "--steps", "2", "--out", (root / "bad2").string()}) == cli::kExitConfig);
}
