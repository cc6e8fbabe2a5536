// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace post::nn {

/// NCHW extent.
struct Shape {
    int n = 0, c = 0, h = 0, w = 0;

    std::size_t numel() const noexcept { return std::size_t(n) * c * h * w; }
    std::size_t plane() const noexcept { return std::size_t(h) * w; }
    std::string str() const;

    friend bool operator==(const Shape&, const Shape&) = default;
};

class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape s, float fill = 0.0f) : shape_(s), data_(s.numel(), fill) {}

    const Shape& shape() const noexcept { return shape_; }
    std::size_t numel() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    float* data() noexcept { return data_.data(); }
    const float* data() const noexcept { return data_.data(); }
    std::span<float> span() noexcept { return data_; }
    std::span<const float> span() const noexcept { return data_; }
    float& operator[](std::size_t i) { return data_[i]; }
    float operator[](std::size_t i) const { return data_[i]; }

    float* sample(int n) { return data_.data() + std::size_t(n) * shape_.c * shape_.plane(); }
    const float* sample(int n) const { return data_.data() + std::size_t(n) * shape_.c * shape_.plane(); }

    void fill(float v);
    /// Elementwise this += other; shapes must match.
    void add(const Tensor& other);

private:
    Shape shape_;
    std::vector<float> data_;
};

}  // namespace post::nn
