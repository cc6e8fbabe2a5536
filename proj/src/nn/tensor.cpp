// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "post/nn/tensor.hpp"

#include <algorithm>

#include "post/error.hpp"

namespace post::nn {

std::string Shape::str() const {
    return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," + std::to_string(w) + ")";
}

void Tensor::fill(float v) { std::fill(data_.begin(), data_.end(), v); }

void Tensor::add(const Tensor& other) {
    if (other.shape_ != shape_) {
        throw Error(ErrorCode::ShapeMismatch, "tensor add " + shape_.str() + " vs " + other.shape_.str());
    }
    const float* src = other.data_.data();
    float* dst = data_.data();
    const std::size_t n = data_.size();
#pragma omp simd
    for (std::size_t i = 0; i < n; ++i) dst[i] += src[i];
}

}  // namespace post::nn
