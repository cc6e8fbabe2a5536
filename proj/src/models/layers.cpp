// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "post/models/layers.hpp"

namespace post::models {

nn::Var ConvBn::operator()(nn::Graph& g, nn::Var x, bool relu) const {
    nn::Var y = nn::batch_norm(g, nn::conv2d(g, x, *weight, nullptr, stride, pad), bn);
    return relu ? nn::relu(g, y) : y;
}

ConvBn make_conv_bn(nn::ParameterStore& store, const std::string& name, int in_c, int out_c, int kernel, int stride,
                    Rng& rng) {
    ConvBn c;
    c.weight = &store.add_conv_weight(name + ".w", {out_c, in_c, kernel, kernel}, rng);
    c.bn.gamma = &store.add(name + ".bn.gamma", {1, out_c, 1, 1}, 1.0f);
    c.bn.beta = &store.add(name + ".bn.beta", {1, out_c, 1, 1}, 0.0f);
    c.bn.running_mean = &store.add(name + ".bn.mean", {1, out_c, 1, 1}, 0.0f, false);
    c.bn.running_var = &store.add(name + ".bn.var", {1, out_c, 1, 1}, 1.0f, false);
    c.stride = stride;
    c.pad = kernel / 2;
    return c;
}

nn::Var BasicBlock::operator()(nn::Graph& g, nn::Var x) const {
    nn::Var y = second(g, first(g, x), false);
    return nn::relu(g, nn::add(g, y, x));
}

BasicBlock make_basic_block(nn::ParameterStore& store, const std::string& name, int width, Rng& rng) {
    return {make_conv_bn(store, name + ".c1", width, width, 3, 1, rng),
            make_conv_bn(store, name + ".c2", width, width, 3, 1, rng)};
}

}  // namespace post::models
