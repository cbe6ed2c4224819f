// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include "ldm3d/nn/optim.hpp"

#include <cmath>

#include "ldm3d/core/error.hpp"
#include "ldm3d/simd/kernels.hpp"

namespace ldm3d::nn {

Adam::Adam(NamedParams params, AdamOptions opts) : params_(std::move(params)), opts_(opts) {
    for (const auto& [name, p] : params_) {
        m_.push_back(Tensor::zeros(p.shape()));
        v_.push_back(Tensor::zeros(p.shape()));
    }
}

void Adam::zero_grad() {
    for (auto& [name, p] : params_) p.zero_grad();
}

real Adam::step() {
    const auto& k = simd::kernels();
    real sq = 0;
    for (const auto& [name, p] : params_)
        if (p.has_grad()) sq += k.sumsq(p.grad().data(), static_cast<size_t>(p.grad().numel()));
    const real norm = std::sqrt(sq);
    if (!std::isfinite(norm)) throw NumericError("non-finite gradient norm at optimizer step " + std::to_string(t_ + 1));
    const real clip = (opts_.grad_clip > 0 && norm > opts_.grad_clip) ? opts_.grad_clip / norm : 1.0;

    ++t_;
    const real bc1 = 1.0 - std::pow(opts_.beta1, static_cast<real>(t_));
    const real bc2 = 1.0 - std::pow(opts_.beta2, static_cast<real>(t_));
    for (size_t i = 0; i < params_.size(); ++i) {
        Var& p = params_[i].second;
        if (!p.has_grad()) continue;
        const Tensor& g = p.grad();
        Tensor& w = p.mutable_value();
        Tensor& m = m_[i];
        Tensor& v = v_[i];
        for (int64_t j = 0; j < w.numel(); ++j) {
            const real gj = g[j] * clip;
            m[j] = opts_.beta1 * m[j] + (1.0 - opts_.beta1) * gj;
            v[j] = opts_.beta2 * v[j] + (1.0 - opts_.beta2) * gj * gj;
            w[j] -= opts_.lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + opts_.eps);
        }
    }
    return norm;
}

std::map<std::string, Tensor> Adam::state() const {
    std::map<std::string, Tensor> out;
    for (size_t i = 0; i < params_.size(); ++i) {
        out.emplace("m." + params_[i].first, m_[i]);
        out.emplace("v." + params_[i].first, v_[i]);
    }
    return out;
}

void Adam::load_state(const std::map<std::string, Tensor>& state, int64_t steps) {
    for (size_t i = 0; i < params_.size(); ++i) {
        auto m = state.find("m." + params_[i].first);
        auto v = state.find("v." + params_[i].first);
        if (m == state.end() || v == state.end()) throw DataError("optimizer state missing for " + params_[i].first);
        if (m->second.shape() != m_[i].shape() || v->second.shape() != v_[i].shape())
            throw DataError("optimizer state shape mismatch for " + params_[i].first);
        m_[i] = m->second;
        v_[i] = v->second;
    }
    t_ = steps;
}

}  // namespace ldm3d::nn
