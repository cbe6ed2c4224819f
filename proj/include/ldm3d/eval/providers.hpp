// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>

#include "ldm3d/core/tensor.hpp"
#include "ldm3d/diffusion/text.hpp"

namespace ldm3d::eval {

// Image -> feature vector, for FID.
class FeatureExtractor {
public:
    virtual ~FeatureExtractor() = default;
    virtual std::string id() const = 0;
    virtual Eigen::VectorXd features(const Tensor& rgb) const = 0;
};

// Image -> class distribution, for IS.
class Classifier {
public:
    virtual ~Classifier() = default;
    virtual std::string id() const = 0;
    virtual Eigen::VectorXd probs(const Tensor& rgb) const = 0;
};

// Joint image/text embedding space, for CLIP similarity.
class ImageTextEmbedder {
public:
    virtual ~ImageTextEmbedder() = default;
    virtual std::string id() const = 0;
    virtual Eigen::VectorXd image(const Tensor& rgb) const = 0;
    virtual Eigen::VectorXd text(const std::string& caption) const = 0;
};

// The defaults below have no learned weights: every image is resized
// (bilinear, aspect ratio not preserved) to a fixed grid, flattened and
// pushed through a seeded Gaussian projection. They make the metric
// plumbing testable; the numbers are not comparable to published scores.
inline constexpr int64_t kProjectionGrid = 16;

class ProjectionFeatures final : public FeatureExtractor {
public:
    explicit ProjectionFeatures(int64_t dim = 16, uint64_t seed = 0xf1d);
    std::string id() const override;
    Eigen::VectorXd features(const Tensor& rgb) const override;

private:
    Eigen::MatrixXd proj_;
    uint64_t seed_;
};

class ProjectionClassifier final : public Classifier {
public:
    explicit ProjectionClassifier(int64_t classes = 10, uint64_t seed = 0x15);
    std::string id() const override;
    Eigen::VectorXd probs(const Tensor& rgb) const override;

private:
    Eigen::MatrixXd proj_;
    uint64_t seed_;
};

// Text side mean-pools a HashTextEncoder; image side is a projection into
// the same width.
class ProjectionImageText final : public ImageTextEmbedder {
public:
    explicit ProjectionImageText(int64_t dim = 16, uint64_t seed = 0xc11);
    std::string id() const override;
    Eigen::VectorXd image(const Tensor& rgb) const override;
    Eigen::VectorXd text(const std::string& caption) const override;

private:
    Eigen::MatrixXd proj_;
    diffusion::HashTextEncoder text_;
    uint64_t seed_;
};

// Flattened kProjectionGrid x kProjectionGrid bilinear thumbnail.
Eigen::VectorXd thumbnail_vector(const Tensor& rgb);

}  // namespace ldm3d::eval
