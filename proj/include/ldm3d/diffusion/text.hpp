// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "ldm3d/core/tensor.hpp"

namespace ldm3d::diffusion {

struct TextCondition {
    Tensor tokens_embedding;  // L x context_dim, L >= 1
    std::string provider_id;

    int64_t length() const { return tokens_embedding.dim(0); }
    int64_t context_dim() const { return tokens_embedding.dim(1); }
};

// Caption -> token embedding sequence. Implementations must be
// deterministic per (provider, caption); the empty caption maps to the
// unconditional embedding used for guidance.
class TextEncoder {
public:
    virtual ~TextEncoder() = default;
    virtual std::string id() const = 0;
    virtual int64_t context_dim() const = 0;
    virtual TextCondition encode(const std::string& caption) const = 0;
};

// Lower-cased alphanumeric word tokens. Exposed for tests.
std::vector<std::string> tokenize(const std::string& caption);

// No learned weights: each token's vector is a seeded Gaussian keyed by the
// FNV-1a hash of the token, plus a sinusoidal position code. The empty
// caption yields a single reserved null token.
class HashTextEncoder final : public TextEncoder {
public:
    explicit HashTextEncoder(int64_t context_dim = 16, int64_t max_tokens = 16, uint64_t seed = 0x1d3);

    std::string id() const override;
    int64_t context_dim() const override { return dim_; }
    TextCondition encode(const std::string& caption) const override;

private:
    Tensor token_vector(const std::string& token) const;

    int64_t dim_;
    int64_t max_tokens_;
    uint64_t seed_;
};

TextCondition embed_text(const std::string& caption, const TextEncoder& provider);

}  // namespace ldm3d::diffusion
