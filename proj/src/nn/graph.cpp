// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "post/nn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "post/error.hpp"
#include "post/hash.hpp"
#include "post/nn/kernels.hpp"

namespace post::nn {

namespace {

constexpr char kMagic[8] = {'P', 'O', 'S', 'T', 'W', '0', '0', '1'};

template <typename T>
void put(std::vector<std::uint8_t>& out, const T& v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out.insert(out.end(), p, p + sizeof(T));
}

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& b) : b_(b) {}
    template <typename T>
    T get() {
        T v;
        bytes(&v, sizeof(T));
        return v;
    }
    void bytes(void* dst, std::size_t n) {
        if (pos_ + n > b_.size()) throw Error(ErrorCode::IoError, "weight blob truncated");
        std::memcpy(dst, b_.data() + pos_, n);
        pos_ += n;
    }
    bool done() const noexcept { return pos_ == b_.size(); }

private:
    const std::vector<std::uint8_t>& b_;
    std::size_t pos_ = 0;
};

}  // namespace

Parameter& ParameterStore::add(const std::string& name, Shape shape, float fill, bool trainable, bool decay) {
    if (find(name)) throw Error(ErrorCode::InvalidArgument, "duplicate parameter " + name);
    auto p = std::make_unique<Parameter>();
    p->name = name;
    p->value = Tensor(shape, fill);
    if (trainable) p->grad = Tensor(shape);
    p->trainable = trainable;
    p->decay = decay;
    params_.push_back(std::move(p));
    return *params_.back();
}

Parameter& ParameterStore::add_conv_weight(const std::string& name, Shape shape, Rng& rng) {
    Parameter& p = add(name, shape, 0.0f, true, true);
    const double fan_in = static_cast<double>(shape.c) * shape.h * shape.w;
    const double std = std::sqrt(2.0 / fan_in);
    for (std::size_t i = 0; i < p.value.numel(); ++i) p.value[i] = static_cast<float>(rng.normal() * std);
    return p;
}

Parameter* ParameterStore::find(const std::string& name) noexcept {
    for (auto& p : params_) {
        if (p->name == name) return p.get();
    }
    return nullptr;
}

std::size_t ParameterStore::trainable_count() const noexcept {
    std::size_t n = 0;
    for (const auto& p : params_) {
        if (p->trainable) n += p->value.numel();
    }
    return n;
}

void ParameterStore::zero_grad() {
    for (auto& p : params_) {
        if (p->trainable) p->grad.fill(0.0f);
    }
}

std::vector<Tensor> ParameterStore::snapshot() const {
    std::vector<Tensor> out;
    out.reserve(params_.size());
    for (const auto& p : params_) out.push_back(p->value);
    return out;
}

void ParameterStore::restore(const std::vector<Tensor>& values) {
    if (values.size() != params_.size()) throw Error(ErrorCode::ConfigMismatch, "snapshot size mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i].shape() != params_[i]->value.shape()) {
            throw Error(ErrorCode::ConfigMismatch, "snapshot shape mismatch for " + params_[i]->name);
        }
        params_[i]->value = values[i];
    }
}

std::vector<std::uint8_t> ParameterStore::serialize() const {
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    put(out, static_cast<std::uint32_t>(params_.size()));
    for (const auto& p : params_) {
        put(out, static_cast<std::uint32_t>(p->name.size()));
        out.insert(out.end(), p->name.begin(), p->name.end());
        const Shape& s = p->value.shape();
        for (int d : {s.n, s.c, s.h, s.w}) put(out, static_cast<std::int32_t>(d));
        const auto* f = reinterpret_cast<const std::uint8_t*>(p->value.data());
        out.insert(out.end(), f, f + p->value.numel() * sizeof(float));
    }
    return out;
}

void ParameterStore::deserialize(const std::vector<std::uint8_t>& blob) {
    Reader r(blob);
    char magic[8];
    r.bytes(magic, 8);
    if (!std::equal(std::begin(magic), std::end(magic), std::begin(kMagic))) {
        throw Error(ErrorCode::IoError, "not a weight file (bad magic)");
    }
    const auto count = r.get<std::uint32_t>();
    if (count != params_.size()) {
        throw Error(ErrorCode::ConfigMismatch, "weight file has " + std::to_string(count) + " tensors, architecture has " +
                                                   std::to_string(params_.size()));
    }
    for (auto& p : params_) {
        std::string name(r.get<std::uint32_t>(), '\0');
        r.bytes(name.data(), name.size());
        Shape s;
        s.n = r.get<std::int32_t>();
        s.c = r.get<std::int32_t>();
        s.h = r.get<std::int32_t>();
        s.w = r.get<std::int32_t>();
        if (name != p->name || s != p->value.shape()) {
            throw Error(ErrorCode::ConfigMismatch,
                        "weight " + name + s.str() + " does not match " + p->name + p->value.shape().str());
        }
        r.bytes(p->value.data(), p->value.numel() * sizeof(float));
    }
    if (!r.done()) throw Error(ErrorCode::IoError, "trailing bytes in weight file");
}

void ParameterStore::save(const std::filesystem::path& path) const {
    const auto blob = serialize();
    std::ofstream f(path, std::ios::binary);
    f.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

void ParameterStore::load(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::vector<std::uint8_t> blob((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    deserialize(blob);
}

std::string ParameterStore::hash() const {
    const auto blob = serialize();
    Fnv1a h;
    h.update(blob.data(), blob.size());
    return h.hex();
}

// ---------------------------------------------------------------------------

Var Graph::make(Tensor value, bool requires_grad) {
    auto n = std::make_unique<Node>();
    n->value = std::move(value);
    n->requires_grad = training_ && requires_grad;
    nodes_.push_back(std::move(n));
    return nodes_.back().get();
}

Var Graph::input(Tensor value) { return make(std::move(value), false); }

Tensor& Graph::grad(Var n) {
    if (n->grad.empty()) n->grad = Tensor(n->value.shape());
    return n->grad;
}

void Graph::backward(Var loss) {
    if (!training_) throw Error(ErrorCode::InvalidArgument, "backward on an eval graph");
    if (loss->value.numel() != 1) throw Error(ErrorCode::ShapeMismatch, "backward needs a scalar loss");
    grad(loss).fill(1.0f);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        Node& n = **it;
        if (n.backward && !n.grad.empty()) n.backward();
    }
}

namespace {

bool needs(Graph& g, std::initializer_list<Var> xs) {
    if (!g.training()) return false;
    return std::any_of(xs.begin(), xs.end(), [](Var v) { return v->requires_grad; });
}

}  // namespace

Var conv2d(Graph& g, Var x, Parameter& w, Parameter* bias, int stride, int pad) {
    const Shape xs = x->value.shape();
    const Shape ws = w.value.shape();
    if (ws.c != xs.c || ws.h != ws.w) {
        throw Error(ErrorCode::ShapeMismatch, "conv " + w.name + ws.str() + " on input " + xs.str());
    }
    kernels::ConvShape cs{xs.n, xs.c, xs.h, xs.w, ws.n, ws.h, stride, pad};
    Tensor y({xs.n, ws.n, cs.out_h(), cs.out_w()});
    kernels::conv2d_forward(cs, x->value.data(), w.value.data(), bias ? bias->value.data() : nullptr, y.data());
    Var out = g.make(std::move(y), g.training() && (x->requires_grad || w.trainable));
    if (out->requires_grad) {
        out->backward = [&g, x, out, &w, bias, cs] {
            float* dx = nullptr;
            if (x->requires_grad) {
                const bool fresh = x->grad.empty();
                Tensor& gx = g.grad(x);
                if (fresh) {
                    dx = gx.data();
                } else {
                    Tensor tmp(x->value.shape());
                    kernels::conv2d_backward(cs, x->value.data(), w.value.data(), out->grad.data(), tmp.data(),
                                             w.grad.data(), bias ? bias->grad.data() : nullptr);
                    gx.add(tmp);
                    return;
                }
            }
            kernels::conv2d_backward(cs, x->value.data(), w.value.data(), out->grad.data(), dx, w.grad.data(),
                                     bias ? bias->grad.data() : nullptr);
        };
    }
    return out;
}

Var batch_norm(Graph& g, Var x, const BatchNormParams& bn) {
    const Shape s = x->value.shape();
    const int plane = static_cast<int>(s.plane());
    Tensor y(s);
    if (!g.training()) {
        kernels::batch_norm_forward_eval(s.n, s.c, plane, x->value.data(), bn.gamma->value.data(), bn.beta->value.data(),
                                         bn.running_mean->value.data(), bn.running_var->value.data(), bn.eps, y.data());
        return g.make(std::move(y), false);
    }
    auto stats = std::make_shared<std::pair<std::vector<float>, std::vector<float>>>(std::vector<float>(s.c),
                                                                                       std::vector<float>(s.c));
    auto& [mean, invstd] = *stats;
    kernels::batch_norm_forward_train(s.n, s.c, plane, x->value.data(), bn.gamma->value.data(), bn.beta->value.data(),
                                      bn.eps, y.data(), mean.data(), invstd.data());
    // running statistics use the unbiased batch variance
    const double count = static_cast<double>(s.n) * plane;
    const double unbias = count > 1 ? count / (count - 1) : 1.0;
    for (int c = 0; c < s.c; ++c) {
        const double var = 1.0 / (double(invstd[c]) * invstd[c]) - bn.eps;
        float& rm = bn.running_mean->value[c];
        float& rv = bn.running_var->value[c];
        rm = (1 - bn.momentum) * rm + bn.momentum * mean[c];
        rv = static_cast<float>((1 - bn.momentum) * rv + bn.momentum * var * unbias);
    }
    Var out = g.make(std::move(y), true);
    out->backward = [&g, x, out, bn, stats, s, plane] {
        float* dx = nullptr;
        Tensor tmp;
        const bool accumulate = x->requires_grad && !x->grad.empty();
        if (accumulate) {
            tmp = Tensor(s);
            dx = tmp.data();
        } else if (x->requires_grad) {
            dx = g.grad(x).data();
        }
        kernels::batch_norm_backward(s.n, s.c, plane, x->value.data(), out->grad.data(), bn.gamma->value.data(),
                                     stats->first.data(), stats->second.data(), dx, bn.gamma->grad.data(),
                                     bn.beta->grad.data());
        if (accumulate) x->grad.add(tmp);
    };
    return out;
}

Var relu(Graph& g, Var x) {
    Tensor y(x->value.shape());
    const float* src = x->value.data();
    float* dst = y.data();
    const std::size_t n = y.numel();
#pragma omp simd
    for (std::size_t i = 0; i < n; ++i) dst[i] = src[i] > 0.0f ? src[i] : 0.0f;
    Var out = g.make(std::move(y), needs(g, {x}));
    if (out->requires_grad) {
        out->backward = [&g, x, out] {
            float* dx = g.grad(x).data();
            const float* dy = out->grad.data();
            const float* yv = out->value.data();
            const std::size_t n = out->value.numel();
#pragma omp simd
            for (std::size_t i = 0; i < n; ++i) dx[i] += yv[i] > 0.0f ? dy[i] : 0.0f;
        };
    }
    return out;
}

Var add(Graph& g, Var a, Var b) {
    if (a->value.shape() != b->value.shape()) {
        throw Error(ErrorCode::ShapeMismatch, "add " + a->value.shape().str() + " + " + b->value.shape().str());
    }
    Tensor y = a->value;
    y.add(b->value);
    Var out = g.make(std::move(y), needs(g, {a, b}));
    if (out->requires_grad) {
        out->backward = [&g, a, b, out] {
            if (a->requires_grad) g.grad(a).add(out->grad);
            if (b->requires_grad) g.grad(b).add(out->grad);
        };
    }
    return out;
}

Var upsample_nearest(Graph& g, Var x, int factor) {
    const Shape s = x->value.shape();
    if (factor == 1) return x;
    Tensor y({s.n, s.c, s.h * factor, s.w * factor});
    kernels::upsample_nearest_forward(s.n * s.c, s.h, s.w, factor, x->value.data(), y.data());
    Var out = g.make(std::move(y), needs(g, {x}));
    if (out->requires_grad) {
        out->backward = [&g, x, out, s, factor] {
            kernels::upsample_nearest_backward(s.n * s.c, s.h, s.w, factor, out->grad.data(), g.grad(x).data());
        };
    }
    return out;
}

Var upsample_bilinear(Graph& g, Var x, int factor) {
    const Shape s = x->value.shape();
    if (factor == 1) return x;
    Tensor y({s.n, s.c, s.h * factor, s.w * factor});
    kernels::upsample_bilinear_forward(s.n * s.c, s.h, s.w, factor, x->value.data(), y.data());
    Var out = g.make(std::move(y), needs(g, {x}));
    if (out->requires_grad) {
        out->backward = [&g, x, out, s, factor] {
            kernels::upsample_bilinear_backward(s.n * s.c, s.h, s.w, factor, out->grad.data(), g.grad(x).data());
        };
    }
    return out;
}

Var concat_channels(Graph& g, const std::vector<Var>& xs) {
    if (xs.empty()) throw Error(ErrorCode::EmptyInput, "concat of nothing");
    Shape s = xs.front()->value.shape();
    int channels = 0;
    bool grad = false;
    for (Var v : xs) {
        const Shape& vs = v->value.shape();
        if (vs.n != s.n || vs.h != s.h || vs.w != s.w) {
            throw Error(ErrorCode::ShapeMismatch, "concat " + vs.str() + " with " + s.str());
        }
        channels += vs.c;
        grad = grad || v->requires_grad;
    }
    const std::size_t plane = s.plane();
    s.c = channels;
    Tensor y(s);
    for (int n = 0; n < s.n; ++n) {
        float* dst = y.sample(n);
        for (Var v : xs) {
            const std::size_t len = std::size_t(v->value.shape().c) * plane;
            std::copy_n(v->value.sample(n), len, dst);
            dst += len;
        }
    }
    Var out = g.make(std::move(y), g.training() && grad);
    if (out->requires_grad) {
        out->backward = [&g, xs, out, plane] {
            const int batch = out->value.shape().n;
            std::size_t offset = 0;
            for (Var v : xs) {
                const std::size_t len = std::size_t(v->value.shape().c) * plane;
                if (v->requires_grad) {
                    Tensor& gv = g.grad(v);
                    for (int n = 0; n < batch; ++n) {
                        const float* src = out->grad.sample(n) + offset;
                        float* dst = gv.sample(n);
                        for (std::size_t i = 0; i < len; ++i) dst[i] += src[i];
                    }
                }
                offset += len;
            }
        };
    }
    return out;
}

Var custom_loss(Graph& g, Var x, const std::function<double(const Tensor& x, Tensor& dx)>& fn) {
    auto dx = std::make_shared<Tensor>(x->value.shape());
    const double loss = fn(x->value, *dx);
    Var out = g.make(Tensor({1, 1, 1, 1}, static_cast<float>(loss)), needs(g, {x}));
    if (out->requires_grad) {
        out->backward = [&g, x, out, dx] {
            const float scale = out->grad[0];
            Tensor& gx = g.grad(x);
            const std::size_t n = gx.numel();
            for (std::size_t i = 0; i < n; ++i) gx[i] += scale * (*dx)[i];
        };
    }
    return out;
}

Var mse(Graph& g, Var x, const Tensor& target) {
    if (x->value.shape() != target.shape()) {
        throw Error(ErrorCode::ShapeMismatch, "mse " + x->value.shape().str() + " vs " + target.shape().str());
    }
    return custom_loss(g, x, [&target](const Tensor& v, Tensor& dx) {
        const std::size_t n = v.numel();
        double acc = 0.0;
        const float k = 2.0f / static_cast<float>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const float d = v[i] - target[i];
            acc += double(d) * d;
            dx[i] = k * d;
        }
        return acc / static_cast<double>(n);
    });
}

}  // namespace post::nn
