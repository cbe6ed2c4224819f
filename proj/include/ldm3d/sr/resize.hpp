// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "ldm3d/core/tensor.hpp"

namespace ldm3d::sr {

enum class Interp { Bicubic, Bilinear, Nearest };

std::string interp_name(Interp m);
Interp interp_from_name(const std::string& s);

// Separable resize of a C x H x W tensor with half-pixel centers and
// replicated edges. No antialiasing prefilter, so downscaling a linear
// signal with the cubic kernel (a = -0.5) stays exact away from the borders.
Tensor resize(const Tensor& img, int64_t out_h, int64_t out_w, Interp mode);

// Separable Gaussian blur, radius ceil(3 sigma), replicated edges.
// sigma <= 0 returns the input unchanged.
Tensor gaussian_blur(const Tensor& img, real sigma);

}  // namespace ldm3d::sr
