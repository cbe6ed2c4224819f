// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include "ldm3d/core/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ldm3d/core/error.hpp"

namespace ldm3d {

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
    os << ']';
    return os.str();
}

int64_t shape_numel(const Shape& s) {
    int64_t n = 1;
    for (auto d : s) {
        LDM3D_REQUIRE(d >= 0, "negative dimension in shape " + shape_str(s));
        n *= d;
    }
    return n;
}

Tensor::Tensor(Shape shape, real fill) : shape_(std::move(shape)) {
    data_.assign(static_cast<size_t>(shape_numel(shape_)), fill);
}

Tensor::Tensor(Shape shape, std::vector<real> data) : shape_(std::move(shape)), data_(std::move(data)) {
    LDM3D_REQUIRE(static_cast<int64_t>(data_.size()) == shape_numel(shape_),
                  "data size does not match shape " + shape_str(shape_));
}

Tensor Tensor::reshaped(Shape s) const {
    LDM3D_REQUIRE(shape_numel(s) == numel(), "cannot reshape " + shape_str(shape_) + " to " + shape_str(s));
    return Tensor(std::move(s), data_);
}

void Tensor::fill(real v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](real v) { return std::isfinite(v); });
}

real Tensor::min() const {
    LDM3D_REQUIRE(!data_.empty(), "min of empty tensor");
    return *std::min_element(data_.begin(), data_.end());
}

real Tensor::max() const {
    LDM3D_REQUIRE(!data_.empty(), "max of empty tensor");
    return *std::max_element(data_.begin(), data_.end());
}

Tensor Tensor::channel_slice(int64_t begin, int64_t end) const {
    LDM3D_REQUIRE(rank() >= 1 && 0 <= begin && begin <= end && end <= shape_[0],
                  "bad channel slice of " + shape_str(shape_));
    const int64_t plane = shape_[0] ? numel() / shape_[0] : 0;
    Shape s = shape_;
    s[0] = end - begin;
    std::vector<real> d(data_.begin() + begin * plane, data_.begin() + end * plane);
    return Tensor(std::move(s), std::move(d));
}

Tensor Tensor::concat_channels(const Tensor& a, const Tensor& b) {
    LDM3D_REQUIRE(a.rank() == b.rank() && a.rank() >= 1, "concat rank mismatch");
    for (size_t i = 1; i < a.rank(); ++i)
        LDM3D_REQUIRE(a.shape_[i] == b.shape_[i],
                      "concat spatial mismatch " + shape_str(a.shape_) + " vs " + shape_str(b.shape_));
    Shape s = a.shape_;
    s[0] += b.shape_[0];
    std::vector<real> d;
    d.reserve(a.data_.size() + b.data_.size());
    d.insert(d.end(), a.data_.begin(), a.data_.end());
    d.insert(d.end(), b.data_.begin(), b.data_.end());
    return Tensor(std::move(s), std::move(d));
}

real max_abs_diff(const Tensor& a, const Tensor& b) {
    LDM3D_REQUIRE(a.shape() == b.shape(), "max_abs_diff shape mismatch");
    real m = 0;
    for (int64_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace ldm3d
