// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "json.hpp"

#include "ldm3d/core/tensor.hpp"
#include "ldm3d/nn/autograd.hpp"

namespace ldm3d::nn {

inline constexpr uint32_t kCheckpointVersion = 1;

// On-disk layout (little-endian):
//   "LDM3DCKP"  u32 version
//   u64 header_len, header JSON {"kind", "step", "config"}
//   u64 tensor_count, then per tensor:
//     u32 name_len, name bytes, u32 rank, i64 dims[rank], f64 data[numel]
// Tensors are written in name order, so identical content gives identical bytes.
struct Checkpoint {
    std::string kind;
    int64_t step = 0;
    nlohmann::json config = nlohmann::json::object();
    std::map<std::string, Tensor> tensors;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

void store_params(Checkpoint& ckpt, const NamedParams& params, const std::string& prefix = "");
// Copies stored values into the parameters; every parameter must be present
// with a matching shape.
void restore_params(const Checkpoint& ckpt, NamedParams& params, const std::string& prefix = "");

}  // namespace ldm3d::nn
