// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include "ldm3d/diffusion/text.hpp"

#include <cctype>
#include <cmath>

#include "ldm3d/core/error.hpp"
#include "ldm3d/core/rng.hpp"

namespace ldm3d::diffusion {

namespace {
constexpr const char* kNullToken = "\x01<uncond>";
}

std::vector<std::string> tokenize(const std::string& caption) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : caption) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

HashTextEncoder::HashTextEncoder(int64_t context_dim, int64_t max_tokens, uint64_t seed)
    : dim_(context_dim), max_tokens_(max_tokens), seed_(seed) {
    if (dim_ < 2 || max_tokens_ < 1) throw ConfigError("hash text encoder needs context_dim >= 2 and max_tokens >= 1");
}

std::string HashTextEncoder::id() const {
    return "hash-v1:d" + std::to_string(dim_) + ":n" + std::to_string(max_tokens_) + ":s" + std::to_string(seed_);
}

Tensor HashTextEncoder::token_vector(const std::string& token) const {
    Rng rng(derive_seed(seed_, token));
    return rng.normal_like({dim_}, 1.0 / std::sqrt(static_cast<real>(dim_)) * 2.0);
}

TextCondition HashTextEncoder::encode(const std::string& caption) const {
    std::vector<std::string> tokens = tokenize(caption);
    if (tokens.empty()) tokens.push_back(kNullToken);
    if (static_cast<int64_t>(tokens.size()) > max_tokens_) tokens.resize(static_cast<size_t>(max_tokens_));
    const auto len = static_cast<int64_t>(tokens.size());
    Tensor emb(Shape{len, dim_});
    for (int64_t i = 0; i < len; ++i) {
        const Tensor v = token_vector(tokens[static_cast<size_t>(i)]);
        for (int64_t j = 0; j < dim_; ++j) {
            const real freq = std::pow(100.0, -static_cast<real>(j / 2 * 2) / static_cast<real>(dim_));
            const real pos = (j % 2 == 0 ? std::sin(i * freq) : std::cos(i * freq)) * 0.1;
            emb[i * dim_ + j] = v[j] + pos;
        }
    }
    return {std::move(emb), id()};
}

TextCondition embed_text(const std::string& caption, const TextEncoder& provider) {
    TextCondition c = provider.encode(caption);
    LDM3D_REQUIRE(c.tokens_embedding.rank() == 2 && c.length() >= 1 && c.context_dim() == provider.context_dim(),
                  "text provider returned a malformed embedding");
    if (!c.tokens_embedding.all_finite()) throw NumericError("text provider returned non-finite values");
    return c;
}

}  // namespace ldm3d::diffusion
