// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "post/nn/graph.hpp"

namespace post::nn {

class Optimizer {
public:
    virtual ~Optimizer() = default;
    /// Applies one update from the accumulated grads, then zeroes them.
    virtual void step(float lr) = 0;
};

/// Heavy-ball SGD; weight decay is added to the gradient of decay-flagged params.
class Sgd final : public Optimizer {
public:
    Sgd(ParameterStore& store, float momentum, float weight_decay);
    void step(float lr) override;

private:
    ParameterStore& store_;
    float momentum_, weight_decay_;
    std::vector<Tensor> velocity_;
};

class Adam final : public Optimizer {
public:
    Adam(ParameterStore& store, float beta1, float beta2, float eps = 1e-8f);
    void step(float lr) override;

private:
    ParameterStore& store_;
    float beta1_, beta2_, eps_;
    long long t_ = 0;
    std::vector<Tensor> m_, v_;
};

}  // namespace post::nn
