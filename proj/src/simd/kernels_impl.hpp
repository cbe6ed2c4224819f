// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ldm3d/simd/kernels.hpp"

namespace ldm3d::simd::detail {

// Defined in the per-ISA translation units that are compiled for this target.
// Each returns the table without checking CPU support.
const KernelTable* avx2_table();
const KernelTable* neon_table();

}  // namespace ldm3d::simd::detail
