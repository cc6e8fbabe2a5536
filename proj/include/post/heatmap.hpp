// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "post/geometry.hpp"

namespace post {

struct CodecConfig {
    double sigma_x = 1.5;  ///< grid cells
    double sigma_y = 1.5;
    int heatmap_size = 64;
    int input_size = 256;

    double stride() const noexcept { return static_cast<double>(input_size) / heatmap_size; }
    /// Throws InvalidArgument on sigma <= 0 or input_size not divisible by heatmap_size.
    void validate() const;
};

/// Channel-major (C, H, W) activations, one channel per landmark in A, B, B', C, C' order.
struct HeatmapStack {
    int channels = static_cast<int>(kNumLandmarks);
    int height = 0;
    int width = 0;
    std::vector<double> values;

    HeatmapStack() = default;
    HeatmapStack(int c, int h, int w) : channels(c), height(h), width(w), values(std::size_t(c) * h * w, 0.0) {}

    double& at(int c, int y, int x) { return values[(std::size_t(c) * height + y) * width + x]; }
    double at(int c, int y, int x) const { return values[(std::size_t(c) * height + y) * width + x]; }
    std::span<const double> channel(int c) const {
        return {values.data() + std::size_t(c) * height * width, std::size_t(height) * width};
    }
};

/// Crop pixel coordinate -> continuous heatmap coordinate. Cell i has its center
/// at heatmap coordinate i, i.e. at crop pixel (i + 0.5) * stride.
inline double to_heatmap_coord(double pixel, double stride) noexcept { return pixel / stride - 0.5; }
inline double to_pixel_coord(double cell, double stride) noexcept { return (cell + 0.5) * stride; }

/// Amplitude-1 Gaussian per landmark. Throws OutOfFrame if a landmark lies
/// outside [0, input_size) (equivalently [0, heatmap_size) in cell units).
HeatmapStack encode(const LandmarkSet& crop_landmarks, const CodecConfig& cfg);

struct DecodeOptions {
    bool refine = true;  ///< quarter-cell shift toward the larger axial neighbor
};

struct DecodedLandmarks {
    LandmarkSet landmarks;  ///< crop frame
    std::array<double, kNumLandmarks> confidence{};
};

/// Throws FlatHeatmap when a channel is constant, ShapeMismatch if the stack does not fit cfg.
DecodedLandmarks decode(const HeatmapStack& hm, const CodecConfig& cfg, DecodeOptions opts = {});

/// Mean squared difference over every channel and cell. Throws ShapeMismatch.
double mse_loss(const HeatmapStack& pred, const HeatmapStack& target);

}  // namespace post
