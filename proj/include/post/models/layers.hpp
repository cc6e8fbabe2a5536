// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "post/nn/graph.hpp"
#include "post/random.hpp"

namespace post::models {

/// Bias-free convolution followed by BatchNorm, optionally ReLU.
struct ConvBn {
    nn::Parameter* weight = nullptr;
    nn::BatchNormParams bn;
    int stride = 1;
    int pad = 1;

    nn::Var operator()(nn::Graph& g, nn::Var x, bool relu = true) const;
};

ConvBn make_conv_bn(nn::ParameterStore& store, const std::string& name, int in_c, int out_c, int kernel, int stride,
                    Rng& rng);

/// Two 3x3 ConvBn with an identity shortcut.
struct BasicBlock {
    ConvBn first, second;
    nn::Var operator()(nn::Graph& g, nn::Var x) const;
};

BasicBlock make_basic_block(nn::ParameterStore& store, const std::string& name, int width, Rng& rng);

}  // namespace post::models
