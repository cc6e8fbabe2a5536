// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "post/models/detector.hpp"

#include <algorithm>
#include <cmath>

#include "post/error.hpp"
#include "post/models/landmark_net.hpp"
#include "post/models/nms.hpp"

namespace post::models {

namespace {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// log(1 + e^z) without overflow
inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

constexpr float kObjectnessPrior = -4.0f;

}  // namespace

Detector::Detector(const DetectorConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    Rng rng = Rng::derive(cfg_.seed, 0xde7);
    int in_c = 3;
    for (std::size_t k = 0; k < cfg_.widths.size(); ++k) {
        const int w = cfg_.widths[k];
        const std::string name = "backbone." + std::to_string(k);
        levels_.emplace_back(make_conv_bn(store_, name + ".down", in_c, w, 3, 2, rng),
                             make_conv_bn(store_, name + ".conv", w, w, 3, 1, rng));
        in_c = w;
    }
    const std::size_t L = cfg_.widths.size();
    neck_reduce_ = make_conv_bn(store_, "neck.reduce", cfg_.widths[L - 1] + cfg_.widths[L - 2], cfg_.neck_width, 1, 1, rng);
    neck_mix_ = make_conv_bn(store_, "neck.mix", cfg_.neck_width, cfg_.neck_width, 3, 1, rng);
    head_w_ = &store_.add_conv_weight("head.w", {5, cfg_.neck_width, 1, 1}, rng);
    for (std::size_t i = 0; i < head_w_->value.numel(); ++i) head_w_->value[i] *= 0.1f;
    head_b_ = &store_.add("head.b", {1, 5, 1, 1}, 0.0f);
    head_b_->value[0] = kObjectnessPrior;
}

nn::Var Detector::forward(nn::Graph& g, nn::Var x) const {
    const nn::Shape in = x->value.shape();
    if (in.c != 3 || in.h != cfg_.input_size || in.w != cfg_.input_size) {
        throw Error(ErrorCode::ConfigMismatch, "detector expects (N,3," + std::to_string(cfg_.input_size) + "," +
                                                   std::to_string(cfg_.input_size) + ") input, got " + in.str());
    }
    std::vector<nn::Var> feats;
    nn::Var h = x;
    for (const auto& [down, conv] : levels_) {
        h = conv(g, down(g, h));
        feats.push_back(h);
    }
    const std::size_t L = feats.size();
    nn::Var merged = nn::concat_channels(g, {feats[L - 2], nn::upsample_nearest(g, feats[L - 1], 2)});
    nn::Var n = neck_mix_(g, neck_reduce_(g, merged));
    return nn::conv2d(g, n, *head_w_, head_b_, 1, 0);
}

FrameTransform letterbox_transform(ImageSize image, int input_size) {
    return build_crop_transform({0, 0, double(image.width), double(image.height), 1.0}, 0.0, {input_size, input_size});
}

FrameTransform Detector::letterbox(ImageSize image) const { return letterbox_transform(image, cfg_.input_size); }

std::vector<BoundingBox> decode_grid(const float* raw, int grid, int input_size) {
    const double stride = static_cast<double>(input_size) / grid;
    const std::size_t plane = std::size_t(grid) * grid;
    std::vector<BoundingBox> out;
    out.reserve(plane);
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            const std::size_t c = std::size_t(i) * grid + j;
            const double cx = (j + sigmoid(raw[plane + c])) * stride;
            const double cy = (i + sigmoid(raw[2 * plane + c])) * stride;
            const double w = sigmoid(raw[3 * plane + c]) * input_size;
            const double h = sigmoid(raw[4 * plane + c]) * input_size;
            out.push_back({cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2, sigmoid(raw[c])});
        }
    }
    return out;
}

std::vector<BoundingBox> Detector::candidates(const Image& img) const {
    const FrameTransform lb = letterbox(img.size());
    nn::Graph g(false);
    nn::Tensor x({1, 3, cfg_.input_size, cfg_.input_size});
    const auto planar = crop_planar(img, lb, cfg_.input_size);
    std::copy(planar.begin(), planar.end(), x.data());
    nn::Var y = forward(g, g.input(std::move(x)));
    auto boxes = decode_grid(y->value.data(), cfg_.grid_size, cfg_.input_size);
    const FrameTransform back = invert(lb);
    for (auto& b : boxes) {
        const Point2 lo = apply_transform(back, Point2{b.x_min, b.y_min});
        const Point2 hi = apply_transform(back, Point2{b.x_max, b.y_max});
        b = {lo.x, lo.y, hi.x, hi.y, b.confidence};
    }
    return boxes;
}

std::vector<BoundingBox> Detector::detect(const Image& img, double conf_threshold) const {
    auto kept = nms(candidates(img), cfg_.nms_iou_threshold, conf_threshold);
    std::vector<BoundingBox> out;
    for (auto b : kept) {
        b.x_min = std::clamp(b.x_min, 0.0, double(img.width));
        b.x_max = std::clamp(b.x_max, 0.0, double(img.width));
        b.y_min = std::clamp(b.y_min, 0.0, double(img.height));
        b.y_max = std::clamp(b.y_max, 0.0, double(img.height));
        if (b.x_max > b.x_min && b.y_max > b.y_min) out.push_back(b);
    }
    return out;
}

DetectionLossParts detection_loss(const nn::Tensor& raw, const std::vector<BoundingBox>& targets,
                                  const DetectorConfig& cfg, nn::Tensor& grad) {
    const nn::Shape s = raw.shape();
    const int G = cfg.grid_size;
    if (s.c != 5 || s.h != G || s.w != G || static_cast<std::size_t>(s.n) != targets.size()) {
        throw Error(ErrorCode::ShapeMismatch, "detection loss on " + s.str());
    }
    grad = nn::Tensor(s);
    const std::size_t plane = std::size_t(G) * G;
    const double stride = cfg.stride(), in = cfg.input_size, inv_n = 1.0 / s.n;
    DetectionLossParts parts;
    for (int n = 0; n < s.n; ++n) {
        const float* r = raw.sample(n);
        float* d = grad.sample(n);
        const BoundingBox& t = targets[n];
        const Point2 c = t.center();
        const int ci = std::clamp(static_cast<int>(std::floor(c.y / stride)), 0, G - 1);
        const int cj = std::clamp(static_cast<int>(std::floor(c.x / stride)), 0, G - 1);
        const std::size_t pos = std::size_t(ci) * G + cj;
        for (std::size_t k = 0; k < plane; ++k) {
            const double z = r[k], y = (k == pos) ? 1.0 : 0.0;
            parts.objectness += (softplus(z) - y * z) * inv_n;
            d[k] = static_cast<float>((sigmoid(z) - y) * inv_n);
        }
        const double goal[4] = {std::clamp(c.x / stride - cj, 0.0, 1.0), std::clamp(c.y / stride - ci, 0.0, 1.0),
                                std::clamp(t.width() / in, 0.0, 1.0), std::clamp(t.height() / in, 0.0, 1.0)};
        for (int q = 0; q < 4; ++q) {
            const std::size_t idx = (q + 1) * plane + pos;
            const double p = sigmoid(r[idx]), e = p - goal[q];
            parts.box += cfg.box_loss_weight * e * e * inv_n;
            d[idx] = static_cast<float>(cfg.box_loss_weight * 2 * e * p * (1 - p) * inv_n);
        }
    }
    parts.total = parts.objectness + parts.box;
    return parts;
}

}  // namespace post::models
