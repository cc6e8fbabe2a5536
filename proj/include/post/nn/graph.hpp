// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "post/nn/tensor.hpp"
#include "post/random.hpp"

namespace post::nn {

/// A named tensor owned by a ParameterStore. Non-trainable entries hold
/// running statistics; they are serialized but never touched by optimizers.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;
    bool trainable = true;
    bool decay = true;  ///< subject to weight decay (conv weights only)
};

class ParameterStore {
public:
    ParameterStore() = default;
    ParameterStore(const ParameterStore&) = delete;
    ParameterStore& operator=(const ParameterStore&) = delete;

    Parameter& add(const std::string& name, Shape shape, float fill = 0.0f, bool trainable = true, bool decay = false);
    /// Kaiming-normal (fan-in, ReLU gain) initialized convolution weight.
    Parameter& add_conv_weight(const std::string& name, Shape shape, Rng& rng);

    Parameter* find(const std::string& name) noexcept;
    const std::vector<std::unique_ptr<Parameter>>& all() const noexcept { return params_; }
    std::size_t trainable_count() const noexcept;

    void zero_grad();

    /// Copy of every value, used to snapshot best weights.
    std::vector<Tensor> snapshot() const;
    void restore(const std::vector<Tensor>& values);

    /// Binary blob: magic, count, then per entry name/shape/float data.
    void save(const std::filesystem::path& path) const;
    std::vector<std::uint8_t> serialize() const;
    /// Names and shapes must match the built architecture (ConfigMismatch otherwise).
    void load(const std::filesystem::path& path);
    void deserialize(const std::vector<std::uint8_t>& blob);
    /// FNV-1a over the serialized blob, hex.
    std::string hash() const;

private:
    std::vector<std::unique_ptr<Parameter>> params_;
};

struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::function<void()> backward;
};

using Var = Node*;

/// Define-by-run tape. In eval mode no backward closures are recorded and
/// BatchNorm uses running statistics.
class Graph {
public:
    explicit Graph(bool training) : training_(training) {}
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    bool training() const noexcept { return training_; }

    Var input(Tensor value);
    Var make(Tensor value, bool requires_grad);

    /// Seeds d(loss)/d(loss) = 1 for a 1-element node and runs the tape backwards.
    void backward(Var loss);

    /// Grad buffer of n, zero-allocated on first use.
    Tensor& grad(Var n);

private:
    bool training_;
    std::vector<std::unique_ptr<Node>> nodes_;
};

struct BatchNormParams {
    Parameter* gamma = nullptr;
    Parameter* beta = nullptr;
    Parameter* running_mean = nullptr;
    Parameter* running_var = nullptr;
    float momentum = 0.1f;
    float eps = 1e-5f;
};

Var conv2d(Graph& g, Var x, Parameter& w, Parameter* bias, int stride, int pad);
Var batch_norm(Graph& g, Var x, const BatchNormParams& bn);
Var relu(Graph& g, Var x);
Var add(Graph& g, Var a, Var b);
Var upsample_nearest(Graph& g, Var x, int factor);
Var upsample_bilinear(Graph& g, Var x, int factor);
Var concat_channels(Graph& g, const std::vector<Var>& xs);

/// Scalar node whose value and input gradient come from `fn`, which fills
/// dx (same shape as x) with d(loss)/dx and returns the loss.
Var custom_loss(Graph& g, Var x, const std::function<double(const Tensor& x, Tensor& dx)>& fn);

/// Mean squared error against a constant target.
Var mse(Graph& g, Var x, const Tensor& target);

}  // namespace post::nn
