// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ldm3d/core/tensor.hpp"

namespace ldm3d::nn {

// Reverse-mode tape. Each op records its parents and a closure that
// accumulates the op's input gradients from its output gradient.
struct Node {
    Tensor value;
    Tensor grad;  // allocated on first accumulation
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;

    Tensor& grad_buffer();
};

class Var {
public:
    Var() = default;
    explicit Var(Tensor value, bool requires_grad = false);

    bool defined() const noexcept { return node_ != nullptr; }
    const Tensor& value() const { return node_->value; }
    Tensor& mutable_value() { return node_->value; }
    const Tensor& grad() const { return node_->grad; }
    bool has_grad() const { return node_ && !node_->grad.empty(); }
    bool requires_grad() const { return node_ && node_->requires_grad; }
    const Shape& shape() const { return node_->value.shape(); }
    void zero_grad() { node_->grad = Tensor(); }

    const std::shared_ptr<Node>& node() const { return node_; }

    // Result of an op. The closure is dropped (and the node detached) when
    // grad mode is off or no parent needs a gradient.
    static Var make(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward_fn);

private:
    std::shared_ptr<Node> node_;
};

bool grad_enabled() noexcept;

// Disables tape recording on this thread for its lifetime.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool prev_;
};

// Seeds d(loss)/d(loss) = 1 and runs the tape. Intermediate nodes release
// their closures afterwards; leaf gradients accumulate across calls.
void backward(const Var& loss);

using NamedParams = std::vector<std::pair<std::string, Var>>;

}  // namespace ldm3d::nn
