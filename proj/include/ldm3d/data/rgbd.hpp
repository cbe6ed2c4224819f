// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <utility>

#include "ldm3d/core/tensor.hpp"
#include "ldm3d/data/image_io.hpp"

namespace ldm3d {

// Spatial dims of everything that enters the autoencoder must be multiples
// of its total downsampling factor.
inline constexpr int64_t kAeDownsample = 8;

// RGB (3 x H x W) plus normalized disparity (1 x H x W), both in [-1, 1].
struct RgbdSample {
    Tensor rgb;
    Tensor depth;
    std::string caption;
    std::string id;
    int source_depth_bits = 16;

    int64_t height() const { return rgb.height(); }
    int64_t width() const { return rgb.width(); }
};

// Throws ContractError when the sample breaks its invariants (matching H/W,
// finite values in [-1, 1], dims divisible by 8).
void validate(const RgbdSample& s);

// [0, 255] -> [-1, 1] and back (round to nearest, clamped).
Tensor rgb_from_raster(const io::Raster8& img);
io::Raster8 rgb_to_raster(const Tensor& rgb);
// [0, 2^bits - 1] -> [-1, 1] and back.
Tensor depth_from_raster(const io::Raster16& img, int bits);
io::Raster16 depth_to_raster(const Tensor& depth, int bits);

RgbdSample load_rgbd(const std::filesystem::path& rgb_path, const std::filesystem::path& depth_path, int bits = 16);
void save_rgbd(const RgbdSample& s, const std::filesystem::path& rgb_path, const std::filesystem::path& depth_path);

// Channel order [R, G, B, D].
Tensor merge_channels(const RgbdSample& s);
Tensor merge_channels(const Tensor& rgb, const Tensor& depth);
std::pair<Tensor, Tensor> split_channels(const Tensor& x);

}  // namespace ldm3d
