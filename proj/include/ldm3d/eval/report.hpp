// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "ldm3d/eval/metrics.hpp"
#include "ldm3d/eval/providers.hpp"

namespace ldm3d::eval {

struct DepthEvalReport {
    std::vector<std::string> ids;
    std::vector<real> per_sample_mare;
    std::vector<real> scale;
    std::vector<real> shift;
    real mare_mean = 0;
    real mare_std = 0;
    real mare_filtered_mean = 0;
    real mare_filtered_std = 0;
    real percentile = 90;
    int n_points = 500;
    uint64_t seed = 0;
};

// Normalized depth in [-1, 1] -> disparity in [0, 1].
Tensor to_disparity(const Tensor& depth);

// Per-sample MARE with the fit seeded by derive_seed(seed, id), then the
// percentile-filtered aggregate. Inputs are disparity maps.
DepthEvalReport evaluate_depth(const std::vector<Tensor>& pred, const std::vector<Tensor>& ref,
                               const std::vector<std::string>& ids, int n_points, uint64_t seed, real percentile,
                               real eps = kMareEps);

nlohmann::json to_json(const DepthEvalReport& r);

inline const std::vector<std::string> kAllMetrics{"psnr", "ssim", "fid", "is", "clip", "mare"};

struct EvalConfig {
    std::vector<std::string> metrics = kAllMetrics;
    real percentile = 90;
    int n_points = 500;
    uint64_t seed = 0;
    int is_splits = 10;  // capped at the sample count
    real mare_eps = kMareEps;
    int ssim_window = 11;

    void validate() const;
};

nlohmann::json to_json(const EvalConfig& c);
EvalConfig eval_config_from_json(const nlohmann::json& j);

struct Providers {
    std::shared_ptr<const FeatureExtractor> features;
    std::shared_ptr<const Classifier> classifier;
    std::shared_ptr<const ImageTextEmbedder> image_text;
};

Providers default_providers();

// Pairs the two manifests by id (sets must be equal), computes the selected
// metrics on the generated set and returns the report. PSNR/SSIM run on RGB
// in [-1, 1] (peak 2, i.e. 255 on 8-bit data); MARE on disparity.
nlohmann::json evaluate_run(const std::filesystem::path& generated_manifest,
                            const std::filesystem::path& reference_manifest, const EvalConfig& cfg,
                            const Providers& providers);

// Stable serialization (sorted keys, fixed indent, non-finite values as
// strings) so repeated runs produce identical bytes.
std::string dump_report(const nlohmann::json& report);

}  // namespace ldm3d::eval
