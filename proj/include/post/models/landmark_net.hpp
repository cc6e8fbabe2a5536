// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "post/heatmap.hpp"
#include "post/image.hpp"
#include "post/models/config.hpp"
#include "post/models/layers.hpp"

namespace post::models {

/// High-resolution parallel-stream heatmap regressor.
///
/// Stem (two stride-2 convs) to 1/4 resolution, then `stages` stages. Stage s
/// adds a stream at half the resolution of the previous lowest one, runs
/// residual blocks on every stream and, from stage 2 on, exchanges features
/// across streams by summation. The head bilinearly upsamples every stream to
/// 1/4 resolution, concatenates and applies a 1x1 convolution to 5 channels.
class LandmarkNet {
public:
    explicit LandmarkNet(const LandmarkNetConfig& cfg);

    const LandmarkNetConfig& config() const noexcept { return cfg_; }
    nn::ParameterStore& params() noexcept { return store_; }
    const nn::ParameterStore& params() const noexcept { return store_; }

    /// (N, 3, in, in) -> (N, 5, in/4, in/4). If `stage_shapes` is given it
    /// receives the per-stream output shapes after each stage.
    nn::Var forward(nn::Graph& g, nn::Var x, std::vector<std::vector<nn::Shape>>* stage_shapes = nullptr) const;

    /// Eval-mode forward on one normalized planar crop (3 x in x in floats).
    HeatmapStack predict(const std::vector<float>& planar_crop) const;

private:
    struct Fuse {
        std::vector<ConvBn> path;  ///< empty when source and target stream coincide
    };
    struct Stage {
        std::optional<ConvBn> transition;  ///< creates the new lowest-resolution stream
        std::vector<std::vector<BasicBlock>> blocks;
        std::vector<std::vector<Fuse>> fuse;  ///< fuse[i][j]
    };

    LandmarkNetConfig cfg_;
    nn::ParameterStore store_;
    ConvBn stem1_, stem2_, stem_to_stream_;
    std::vector<Stage> stages_;
    nn::Parameter* head_w_ = nullptr;
    nn::Parameter* head_b_ = nullptr;
};

/// Normalized planar (3 x size x size) crop of `img` under `crop_from_original`.
std::vector<float> crop_planar(const Image& img, const FrameTransform& crop_from_original, int size);

}  // namespace post::models
