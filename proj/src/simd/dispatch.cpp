// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_impl.hpp"
#include "ldm3d/core/error.hpp"

namespace ldm3d::simd {

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
    }
    return "unknown";
}

const KernelTable* avx2_kernels() {
#if defined(LDM3D_HAVE_AVX2)
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return supported ? detail::avx2_table() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable* neon_kernels() {
#if defined(LDM3D_HAVE_NEON)
    return detail::neon_table();  // mandatory on AArch64
#else
    return nullptr;
#endif
}

std::vector<const KernelTable*> available_kernels() {
    std::vector<const KernelTable*> out{&scalar_kernels()};
    if (auto* t = avx2_kernels()) out.push_back(t);
    if (auto* t = neon_kernels()) out.push_back(t);
    return out;
}

namespace {

const KernelTable* lookup(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return &scalar_kernels();
        case Isa::Avx2: return avx2_kernels();
        case Isa::Neon: return neon_kernels();
    }
    return nullptr;
}

const KernelTable* select_initial() {
    if (const char* env = std::getenv("LDM3D_SIMD")) {
        const std::string want(env);
        for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon})
            if (want == isa_name(isa)) {
                if (auto* t = lookup(isa)) return t;
            }
    }
    if (auto* t = avx2_kernels()) return t;
    if (auto* t = neon_kernels()) return t;
    return &scalar_kernels();
}

std::atomic<const KernelTable*>& active() {
    static std::atomic<const KernelTable*> table{select_initial()};
    return table;
}

}  // namespace

const KernelTable& kernels() { return *active().load(std::memory_order_relaxed); }

void set_active(Isa isa) {
    const KernelTable* t = lookup(isa);
    if (!t) throw ContractError(std::string("kernel variant not available: ") + std::string(isa_name(isa)));
    active().store(t, std::memory_order_relaxed);
}

}  // namespace ldm3d::simd
