// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ldm3d/ae/autoencoder.hpp"
#include "ldm3d/diffusion/sampler.hpp"
#include "ldm3d/eval/report.hpp"
#include "ldm3d/sr/degrade.hpp"

namespace ldm3d::cli {

namespace fs = std::filesystem;

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

inline constexpr const char* kOutputRootEnv = "LDM3D_OUTPUT_ROOT";
inline constexpr const char* kResolvedConfigName = "resolved_config.json";

// <$LDM3D_OUTPUT_ROOT or ./ldm3d-out>/<command>
fs::path default_output_dir(const std::string& command);

struct ScheduleConfig {
    int T = 1000;
    real beta_min = 1e-4;
    real beta_max = 0.02;
};

struct PreparePanoConfig {
    uint64_t seed = 0;
    fs::path output_dir;
    fs::path hdr_dir;
    int augmentations = 4;
    int64_t height = 64;  // width is 2 * height
    real exposure = 1.0;
    real exposure_jitter_stops = 0.5;  // exposure * 2^U(-j, j)
    real gamma = 2.2;
    std::string split = "train";
    std::string depth_estimator = "luminance";
};

struct DegradeConfig {
    uint64_t seed = 0;
    fs::path output_dir;
    fs::path manifest;  // HR input
    sr::DegradationRecipe recipe;
};

struct TrainConfig {
    std::string kind;  // ae, diffusion-pano, diffusion-sr
    uint64_t seed = 0;
    fs::path output_dir;
    fs::path manifest;
    fs::path lr_manifest;      // diffusion-sr
    std::string depth_lr = "b";  // diffusion-sr
    std::string depth_estimator = "luminance";
    int64_t steps = 0;
    int64_t batch_size = 0;
    real lr = 0;
    real uncond_prob = 0.1;
    ae::AeConfig ae;
    diffusion::DenoiserConfig denoiser;
    ScheduleConfig schedule;
    fs::path ae_checkpoint;
    fs::path resume;
};

struct SamplePanoConfig {
    uint64_t seed = 0;
    fs::path output_dir;
    std::string prompt;
    int num_samples = 1;
    int64_t latent_height = 8;
    fs::path ae_checkpoint;
    fs::path unet_checkpoint;
    diffusion::SamplerConfig sampler;
    bool trace = false;
};

struct UpscaleConfig {
    uint64_t seed = 0;
    fs::path output_dir;
    fs::path lr_manifest;
    fs::path hr_manifest;  // required for depth_lr = o
    std::string depth_lr = "b";
    std::string depth_estimator = "luminance";
    fs::path ae_checkpoint;
    fs::path unet_checkpoint;
    diffusion::SamplerConfig sampler;
};

struct EvaluateConfig {
    fs::path output_dir;
    fs::path generated;
    fs::path reference;
    eval::EvalConfig eval;
};

// Each parser rejects unknown keys and fills in defaults; each to_json emits
// the fully resolved form, which parses back to the same config.
PreparePanoConfig prepare_pano_config_from_json(const nlohmann::json& j);
DegradeConfig degrade_config_from_json(const nlohmann::json& j);
TrainConfig train_config_from_json(const nlohmann::json& j);
SamplePanoConfig sample_pano_config_from_json(const nlohmann::json& j);
UpscaleConfig upscale_config_from_json(const nlohmann::json& j);
EvaluateConfig evaluate_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PreparePanoConfig& c);
nlohmann::json to_json(const DegradeConfig& c);
nlohmann::json to_json(const TrainConfig& c);
nlohmann::json to_json(const SamplePanoConfig& c);
nlohmann::json to_json(const UpscaleConfig& c);
nlohmann::json to_json(const EvaluateConfig& c);

// Command bodies. Each writes its resolved config into output_dir and
// returns the primary output path (manifest, checkpoint or report).
fs::path cmd_prepare_pano(const PreparePanoConfig& c);
fs::path cmd_degrade(const DegradeConfig& c);
fs::path cmd_train(const TrainConfig& c);
fs::path cmd_sample_pano(const SamplePanoConfig& c);
fs::path cmd_upscale(const UpscaleConfig& c);
fs::path cmd_evaluate(const EvaluateConfig& c);

// Parses argv, runs one subcommand and maps errors to exit codes.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace ldm3d::cli
