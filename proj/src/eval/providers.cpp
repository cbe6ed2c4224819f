// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include "ldm3d/eval/providers.hpp"

#include <cmath>

#include "ldm3d/core/error.hpp"
#include "ldm3d/core/rng.hpp"
#include "ldm3d/sr/resize.hpp"

namespace ldm3d::eval {

namespace {

constexpr int64_t kThumbDim = 3 * kProjectionGrid * kProjectionGrid;

Eigen::MatrixXd gaussian_matrix(int64_t rows, int64_t cols, uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd m(rows, cols);
    const real s = 1.0 / std::sqrt(static_cast<real>(cols));
    for (int64_t r = 0; r < rows; ++r)
        for (int64_t c = 0; c < cols; ++c) m(r, c) = s * rng.normal();
    return m;
}

}  // namespace

Eigen::VectorXd thumbnail_vector(const Tensor& rgb) {
    LDM3D_REQUIRE(rgb.rank() == 3 && rgb.channels() == 3, "expected a 3 x H x W image, got " + shape_str(rgb.shape()));
    const Tensor t = sr::resize(rgb, kProjectionGrid, kProjectionGrid, sr::Interp::Bilinear);
    return Eigen::Map<const Eigen::VectorXd>(t.data(), t.numel());
}

ProjectionFeatures::ProjectionFeatures(int64_t dim, uint64_t seed)
    : proj_(gaussian_matrix(dim, kThumbDim, seed)), seed_(seed) {}

std::string ProjectionFeatures::id() const {
    return "projection-features:d" + std::to_string(proj_.rows()) + ":s" + std::to_string(seed_);
}

Eigen::VectorXd ProjectionFeatures::features(const Tensor& rgb) const {
    return (proj_ * thumbnail_vector(rgb)).array().tanh();
}

ProjectionClassifier::ProjectionClassifier(int64_t classes, uint64_t seed)
    : proj_(gaussian_matrix(classes, kThumbDim, seed)), seed_(seed) {}

std::string ProjectionClassifier::id() const {
    return "projection-classifier:k" + std::to_string(proj_.rows()) + ":s" + std::to_string(seed_);
}

Eigen::VectorXd ProjectionClassifier::probs(const Tensor& rgb) const {
    Eigen::VectorXd logits = 4.0 * proj_ * thumbnail_vector(rgb);
    logits.array() -= logits.maxCoeff();
    Eigen::VectorXd p = logits.array().exp();
    return p / p.sum();
}

ProjectionImageText::ProjectionImageText(int64_t dim, uint64_t seed)
    : proj_(gaussian_matrix(dim, kThumbDim, seed)), text_(dim), seed_(seed) {}

std::string ProjectionImageText::id() const {
    return "projection-image-text:d" + std::to_string(proj_.rows()) + ":s" + std::to_string(seed_) + "+" + text_.id();
}

Eigen::VectorXd ProjectionImageText::image(const Tensor& rgb) const { return proj_ * thumbnail_vector(rgb); }

Eigen::VectorXd ProjectionImageText::text(const std::string& caption) const {
    const auto c = diffusion::embed_text(caption, text_);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(c.context_dim());
    for (int64_t l = 0; l < c.length(); ++l)
        for (int64_t d = 0; d < c.context_dim(); ++d) v(d) += c.tokens_embedding[l * c.context_dim() + d];
    return v / static_cast<real>(c.length());
}

}  // namespace ldm3d::eval
