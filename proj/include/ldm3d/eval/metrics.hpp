// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ldm3d/core/tensor.hpp"

namespace ldm3d::eval {

// 10 log10(peak^2 / MSE); +infinity when the inputs are identical.
real psnr(const Tensor& a, const Tensor& b, real peak);

struct SsimOptions {
    int window = 11;
    real sigma = 1.5;
    real k1 = 0.01;
    real k2 = 0.03;
    real data_range = 2.0;  // images in [-1, 1]
};

// Gaussian-weighted SSIM averaged over every window position that fits
// inside the image (no padding), then over channels.
real ssim(const Tensor& a, const Tensor& b, const SsimOptions& opts = {});

struct FeatureStats {
    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma;
};

// Rows are samples. Unbiased covariance; needs at least two rows.
FeatureStats feature_stats(const Eigen::MatrixXd& features);

// |mu1 - mu2|^2 + Tr(S1 + S2 - 2 (S1 S2)^(1/2)), with the trace of the root
// taken from the eigenvalues of S1^(1/2) S2 S1^(1/2).
real frechet_distance(const FeatureStats& s1, const FeatureStats& s2);

struct MeanStd {
    real mean = 0;
    real std = 0;
};

// Rows of `probs` are class distributions. Rows are split into `splits`
// contiguous chunks; returns mean and population std of
// exp(E[KL(p(y|x) || p(y))]) across chunks.
MeanStd inception_score(const Eigen::MatrixXd& probs, int splits);

// 100 x cosine similarity.
real clip_similarity(const Eigen::VectorXd& image_emb, const Eigen::VectorXd& text_emb);

struct ScaleShift {
    real scale = 1;
    real shift = 0;
};

// Least-squares (s, t) minimising sum (s pred + t - ref)^2. Throws
// NumericError when pred is constant.
ScaleShift fit_scale_shift(const std::vector<real>& pred, const std::vector<real>& ref);

inline constexpr real kMareEps = 1e-3;

struct MareResult {
    real value = 0;
    real scale = 1;
    real shift = 0;
};

// Fits (s, t) on n_points pixels drawn (with replacement) from `seed`, then
// averages |s pred + t - ref| / max(|ref|, eps) over every pixel.
MareResult mare(const Tensor& pred, const Tensor& ref, int n_points, uint64_t seed, real eps = kMareEps);

struct AggregateStats {
    real mean = 0, std = 0;
    real filtered_mean = 0, filtered_std = 0;
    real threshold = 0;
    int64_t kept = 0;
};

// Linear-interpolated percentile (numpy's default).
real percentile(std::vector<real> values, real q);

// Population mean/std over all values and over those <= the q-th percentile.
AggregateStats aggregate_depth_eval(const std::vector<real>& per_sample, real q);

}  // namespace ldm3d::eval
