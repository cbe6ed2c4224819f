// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include "ldm3d/data/rgbd.hpp"

#include <algorithm>
#include <cmath>

#include "ldm3d/core/error.hpp"

namespace ldm3d {

void validate(const RgbdSample& s) {
    LDM3D_REQUIRE(s.rgb.rank() == 3 && s.rgb.channels() == 3, "rgb must be 3 x H x W, got " + shape_str(s.rgb.shape()));
    LDM3D_REQUIRE(s.depth.rank() == 3 && s.depth.channels() == 1,
                  "depth must be 1 x H x W, got " + shape_str(s.depth.shape()));
    LDM3D_REQUIRE(s.rgb.height() == s.depth.height() && s.rgb.width() == s.depth.width(),
                  "rgb and depth resolutions differ");
    LDM3D_REQUIRE(s.rgb.height() % kAeDownsample == 0 && s.rgb.width() % kAeDownsample == 0,
                  "resolution " + shape_str(s.rgb.shape()) + " is not divisible by 8");
    for (const Tensor* t : {&s.rgb, &s.depth})
        for (real v : t->values())
            LDM3D_REQUIRE(std::isfinite(v) && v >= -1.0 && v <= 1.0, "sample values must be finite and in [-1, 1]");
}

namespace {

int64_t full_scale(int bits) {
    if (bits < 1 || bits > 16) throw ContractError("depth bit depth must be in [1, 16]");
    return (int64_t{1} << bits) - 1;
}

real to_unit(int64_t v, int64_t max) { return static_cast<real>(v) / static_cast<real>(max) * 2.0 - 1.0; }

int64_t from_unit(real v, int64_t max) {
    const real q = std::round((v + 1.0) * 0.5 * static_cast<real>(max));
    return static_cast<int64_t>(std::clamp<real>(q, 0.0, static_cast<real>(max)));
}

}  // namespace

Tensor rgb_from_raster(const io::Raster8& img) {
    if (img.channels != 3)
        throw DataError("expected an 8-bit 3-channel RGB image, got " + std::to_string(img.channels) + " channels");
    Tensor t(Shape{3, img.height, img.width});
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) t.at(c, y, x) = to_unit(img.at(y, x, c), 255);
    return t;
}

io::Raster8 rgb_to_raster(const Tensor& rgb) {
    LDM3D_REQUIRE(rgb.rank() == 3 && rgb.channels() == 3, "rgb_to_raster expects 3 x H x W");
    io::Raster8 r{static_cast<int>(rgb.width()), static_cast<int>(rgb.height()), 3, {}};
    r.pixels.resize(static_cast<size_t>(r.width) * r.height * 3);
    for (int y = 0; y < r.height; ++y)
        for (int x = 0; x < r.width; ++x)
            for (int c = 0; c < 3; ++c) r.at(y, x, c) = static_cast<uint8_t>(from_unit(rgb.at(c, y, x), 255));
    return r;
}

Tensor depth_from_raster(const io::Raster16& img, int bits) {
    const int64_t max = full_scale(bits);
    Tensor t(Shape{1, img.height, img.width});
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const int64_t v = img.at(y, x, 0);
            if (v > max) throw DataError("depth value exceeds " + std::to_string(bits) + "-bit range");
            t.at(0, y, x) = to_unit(v, max);
        }
    return t;
}

io::Raster16 depth_to_raster(const Tensor& depth, int bits) {
    LDM3D_REQUIRE(depth.rank() == 3 && depth.channels() == 1, "depth_to_raster expects 1 x H x W");
    const int64_t max = full_scale(bits);
    io::Raster16 r{static_cast<int>(depth.width()), static_cast<int>(depth.height()), 1, {}};
    r.pixels.resize(static_cast<size_t>(r.width) * r.height);
    for (int y = 0; y < r.height; ++y)
        for (int x = 0; x < r.width; ++x) r.at(y, x, 0) = static_cast<uint16_t>(from_unit(depth.at(0, y, x), max));
    return r;
}

RgbdSample load_rgbd(const std::filesystem::path& rgb_path, const std::filesystem::path& depth_path, int bits) {
    RgbdSample s;
    s.rgb = rgb_from_raster(io::read_png8(rgb_path));
    int file_bits = 0;
    const io::Raster16 d = io::read_png_gray(depth_path, file_bits);
    if (file_bits > bits)
        throw DataError(depth_path.string() + " is a " + std::to_string(file_bits) + "-bit raster, expected " +
                        std::to_string(bits) + "-bit");
    s.depth = depth_from_raster(d, bits);
    s.source_depth_bits = bits;
    s.id = rgb_path.stem().string();
    if (s.rgb.height() != s.depth.height() || s.rgb.width() != s.depth.width())
        throw DataError("rgb " + rgb_path.string() + " and depth " + depth_path.string() + " differ in resolution");
    return s;
}

void save_rgbd(const RgbdSample& s, const std::filesystem::path& rgb_path, const std::filesystem::path& depth_path) {
    io::write_png8(rgb_path, rgb_to_raster(s.rgb));
    io::write_png16(depth_path, depth_to_raster(s.depth, s.source_depth_bits));
}

Tensor merge_channels(const Tensor& rgb, const Tensor& depth) {
    LDM3D_REQUIRE(rgb.rank() == 3 && rgb.channels() == 3 && depth.rank() == 3 && depth.channels() == 1,
                  "merge_channels expects 3 x H x W rgb and 1 x H x W depth");
    return Tensor::concat_channels(rgb, depth);
}

Tensor merge_channels(const RgbdSample& s) { return merge_channels(s.rgb, s.depth); }

std::pair<Tensor, Tensor> split_channels(const Tensor& x) {
    LDM3D_REQUIRE(x.rank() == 3 && x.channels() == 4, "split_channels expects 4 x H x W, got " + shape_str(x.shape()));
    return {x.channel_slice(0, 3), x.channel_slice(3, 4)};
}

}  // namespace ldm3d
