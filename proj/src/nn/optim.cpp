// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "post/nn/optim.hpp"

#include <cmath>

namespace post::nn {

Sgd::Sgd(ParameterStore& store, float momentum, float weight_decay)
    : store_(store), momentum_(momentum), weight_decay_(weight_decay) {
    for (const auto& p : store_.all()) velocity_.emplace_back(p->trainable ? Tensor(p->value.shape()) : Tensor());
}

void Sgd::step(float lr) {
    const auto& params = store_.all();
    for (std::size_t k = 0; k < params.size(); ++k) {
        Parameter& p = *params[k];
        if (!p.trainable) continue;
        const float wd = p.decay ? weight_decay_ : 0.0f;
        float* w = p.value.data();
        float* g = p.grad.data();
        float* v = velocity_[k].data();
        const std::size_t n = p.value.numel();
#pragma omp simd
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = momentum_ * v[i] + g[i] + wd * w[i];
            w[i] -= lr * v[i];
            g[i] = 0.0f;
        }
    }
}

Adam::Adam(ParameterStore& store, float beta1, float beta2, float eps)
    : store_(store), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& p : store_.all()) {
        m_.emplace_back(p->trainable ? Tensor(p->value.shape()) : Tensor());
        v_.emplace_back(p->trainable ? Tensor(p->value.shape()) : Tensor());
    }
}

void Adam::step(float lr) {
    ++t_;
    const float c1 = 1.0f - static_cast<float>(std::pow(beta1_, t_));
    const float c2 = 1.0f - static_cast<float>(std::pow(beta2_, t_));
    const float step = lr * std::sqrt(c2) / c1;
    const auto& params = store_.all();
    for (std::size_t k = 0; k < params.size(); ++k) {
        Parameter& p = *params[k];
        if (!p.trainable) continue;
        float* w = p.value.data();
        float* g = p.grad.data();
        float* m = m_[k].data();
        float* v = v_[k].data();
        const std::size_t n = p.value.numel();
        const float eps_hat = eps_ * std::sqrt(c2);
#pragma omp simd
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = beta1_ * m[i] + (1.0f - beta1_) * g[i];
            v[i] = beta2_ * v[i] + (1.0f - beta2_) * g[i] * g[i];
            w[i] -= step * m[i] / (std::sqrt(v[i]) + eps_hat);
            g[i] = 0.0f;
        }
    }
}

}  // namespace post::nn
