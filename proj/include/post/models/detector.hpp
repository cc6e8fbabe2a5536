// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "post/geometry.hpp"
#include "post/image.hpp"
#include "post/models/config.hpp"
#include "post/models/layers.hpp"

namespace post::models {

/// Single-class grid detector. The letterboxed input passes through a stack
/// of stride-2 backbone levels; the neck merges the deepest level (upsampled)
/// with the level at grid resolution; the head predicts, per grid cell,
/// (objectness, tx, ty, tw, th) logits.
class Detector {
public:
    explicit Detector(const DetectorConfig& cfg);

    const DetectorConfig& config() const noexcept { return cfg_; }
    nn::ParameterStore& params() noexcept { return store_; }
    const nn::ParameterStore& params() const noexcept { return store_; }

    /// (N, 3, in, in) -> (N, 5, grid, grid) raw logits.
    nn::Var forward(nn::Graph& g, nn::Var x) const;

    /// Original image -> network input (isotropic, centered).
    FrameTransform letterbox(ImageSize image) const;

    /// One box per grid cell, original frame, before any filtering.
    std::vector<BoundingBox> candidates(const Image& img) const;
    /// Candidates after NMS at `conf_threshold`, clipped to the image.
    std::vector<BoundingBox> detect(const Image& img, double conf_threshold) const;

private:
    DetectorConfig cfg_;
    nn::ParameterStore store_;
    std::vector<std::pair<ConvBn, ConvBn>> levels_;
    ConvBn neck_reduce_, neck_mix_;
    nn::Parameter* head_w_ = nullptr;
    nn::Parameter* head_b_ = nullptr;
};

/// Isotropic, centered mapping of a whole image onto the square network input.
FrameTransform letterbox_transform(ImageSize image, int input_size);

/// Boxes (network-input frame) from one sample's (5, grid, grid) logits, row-major cells.
std::vector<BoundingBox> decode_grid(const float* raw, int grid, int input_size);

struct DetectionLossParts {
    double total = 0.0;
    double objectness = 0.0;
    double box = 0.0;
};

/// Objectness BCE over all cells plus weighted squared error of the box terms
/// at the cell holding each target's center. `targets[n]` is in the input frame.
/// Fills `grad` with d(total)/d(raw); losses are averaged over the batch.
DetectionLossParts detection_loss(const nn::Tensor& raw, const std::vector<BoundingBox>& targets,
                                  const DetectorConfig& cfg, nn::Tensor& grad);

}  // namespace post::models
