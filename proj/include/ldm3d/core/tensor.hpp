// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace ldm3d {

using real = double;
using Shape = std::vector<int64_t>;

std::string shape_str(const Shape& s);
int64_t shape_numel(const Shape& s);

// Dense row-major tensor with value semantics. Images are stored C x H x W.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, real fill = 0.0);
    Tensor(Shape shape, std::vector<real> data);

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape), 0.0); }
    static Tensor full(Shape shape, real v) { return Tensor(std::move(shape), v); }
    static Tensor scalar(real v) { return Tensor(Shape{1}, v); }

    const Shape& shape() const noexcept { return shape_; }
    int64_t dim(size_t i) const { return shape_.at(i); }
    size_t rank() const noexcept { return shape_.size(); }
    int64_t numel() const noexcept { return static_cast<int64_t>(data_.size()); }
    bool empty() const noexcept { return data_.empty(); }

    real* data() noexcept { return data_.data(); }
    const real* data() const noexcept { return data_.data(); }
    std::span<real> values() noexcept { return data_; }
    std::span<const real> values() const noexcept { return data_; }
    std::vector<real>& storage() noexcept { return data_; }
    const std::vector<real>& storage() const noexcept { return data_; }

    real& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
    real operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

    // C x H x W accessors.
    real& at(int64_t c, int64_t y, int64_t x) { return data_[static_cast<size_t>((c * shape_[1] + y) * shape_[2] + x)]; }
    real at(int64_t c, int64_t y, int64_t x) const { return data_[static_cast<size_t>((c * shape_[1] + y) * shape_[2] + x)]; }

    int64_t channels() const { return shape_.at(0); }
    int64_t height() const { return shape_.at(1); }
    int64_t width() const { return shape_.at(2); }

    Tensor reshaped(Shape s) const;
    void fill(real v);
    bool all_finite() const;
    real min() const;
    real max() const;

    // Channels [begin, end) of a C x H x W tensor.
    Tensor channel_slice(int64_t begin, int64_t end) const;
    static Tensor concat_channels(const Tensor& a, const Tensor& b);

    bool operator==(const Tensor& o) const { return shape_ == o.shape_ && data_ == o.data_; }

private:
    Shape shape_;
    std::vector<real> data_;
};

real max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace ldm3d
