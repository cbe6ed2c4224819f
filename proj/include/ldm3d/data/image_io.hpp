// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace ldm3d::io {

// Interleaved raster. T is uint8_t / uint16_t for PNG, float for PFM.
template <class T>
struct Raster {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<T> pixels;

    T& at(int y, int x, int c) { return pixels[(static_cast<size_t>(y) * width + x) * channels + c]; }
    T at(int y, int x, int c) const { return pixels[(static_cast<size_t>(y) * width + x) * channels + c]; }
};

using Raster8 = Raster<uint8_t>;
using Raster16 = Raster<uint16_t>;
using RasterF = Raster<float>;

// PNG. read_png8 expands palette/gray to what the file holds and reports the
// real channel count; callers validate. read_png16 accepts 8- or 16-bit
// single-channel files and reports the file's bit depth.
Raster8 read_png8(const std::filesystem::path& path);
Raster16 read_png_gray(const std::filesystem::path& path, int& bit_depth);
void write_png8(const std::filesystem::path& path, const Raster8& img);
void write_png16(const std::filesystem::path& path, const Raster16& img);

// Portable float map (PF = RGB, Pf = gray), the floating-point radiance
// container used for HDR input.
RasterF read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const RasterF& img);

// In-memory baseline JPEG encode + decode of an 8-bit RGB raster.
Raster8 jpeg_roundtrip(const Raster8& img, int quality);

}  // namespace ldm3d::io
