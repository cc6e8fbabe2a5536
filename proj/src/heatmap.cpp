// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "post/heatmap.hpp"

#include <cmath>
#include <string>

#include "post/error.hpp"

namespace post {

void CodecConfig::validate() const {
    if (!(sigma_x > 0.0) || !(sigma_y > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
    if (heatmap_size <= 0 || input_size <= 0 || input_size % heatmap_size != 0) {
        throw Error(ErrorCode::InvalidArgument, "input_size must be a positive multiple of heatmap_size");
    }
}

HeatmapStack encode(const LandmarkSet& lm, const CodecConfig& cfg) {
    cfg.validate();
    if (lm.frame != Frame::crop) throw Error(ErrorCode::WrongFrame, "heatmap encoding expects crop-frame landmarks");
    const double stride = cfg.stride();
    const int n = cfg.heatmap_size;
    for (std::size_t k = 0; k < kNumLandmarks; ++k) {
        const Point2 p = lm.points[k];
        if (!(p.x >= 0.0 && p.x < cfg.input_size && p.y >= 0.0 && p.y < cfg.input_size)) {
            throw Error(ErrorCode::OutOfFrame, "landmark " + std::string(kLandmarkKeys[k]) + " at (" +
                                                   std::to_string(p.x) + ", " + std::to_string(p.y) +
                                                   ") outside the crop");
        }
    }

    HeatmapStack hm(static_cast<int>(kNumLandmarks), n, n);
    const double gx = 1.0 / (2 * cfg.sigma_x * cfg.sigma_x);
    const double gy = 1.0 / (2 * cfg.sigma_y * cfg.sigma_y);

#pragma omp parallel for schedule(static)
    for (int k = 0; k < static_cast<int>(kNumLandmarks); ++k) {
        const double u = to_heatmap_coord(lm.points[k].x, stride);
        const double v = to_heatmap_coord(lm.points[k].y, stride);
        std::vector<double> col(n), row(n);
        for (int i = 0; i < n; ++i) {
            col[i] = (i - u) * (i - u) * gx;
            row[i] = (i - v) * (i - v) * gy;
        }
        for (int y = 0; y < n; ++y) {
            for (int x = 0; x < n; ++x) hm.at(k, y, x) = std::exp(-(col[x] + row[y]));
        }
    }
    return hm;
}

namespace {

// -0.25, 0 or +0.25 toward the larger neighbor; only when both neighbors exist.
double quarter_shift(double left, double right) {
    if (right > left) return 0.25;
    if (left > right) return -0.25;
    return 0.0;
}

}  // namespace

DecodedLandmarks decode(const HeatmapStack& hm, const CodecConfig& cfg, DecodeOptions opts) {
    cfg.validate();
    const int n = cfg.heatmap_size;
    if (hm.channels != static_cast<int>(kNumLandmarks) || hm.height != n || hm.width != n ||
        hm.values.size() != std::size_t(hm.channels) * n * n) {
        throw Error(ErrorCode::ShapeMismatch, "heatmap stack shape does not match codec config");
    }
    const double stride = cfg.stride();
    DecodedLandmarks out;
    out.landmarks.frame = Frame::crop;

    for (int k = 0; k < hm.channels; ++k) {
        const auto ch = hm.channel(k);
        std::size_t best = 0;
        double lo = ch[0];
        for (std::size_t i = 1; i < ch.size(); ++i) {
            if (ch[i] > ch[best]) best = i;  // strict: first maximum in row-major order wins
            if (ch[i] < lo) lo = ch[i];
        }
        const double peak = ch[best];
        if (!(peak > lo)) throw Error(ErrorCode::FlatHeatmap, "channel " + std::string(kLandmarkKeys[k]) + " is flat");

        const int y = static_cast<int>(best) / n;
        const int x = static_cast<int>(best) % n;
        double u = x, v = y;
        if (opts.refine) {
            if (x > 0 && x < n - 1) u += quarter_shift(hm.at(k, y, x - 1), hm.at(k, y, x + 1));
            if (y > 0 && y < n - 1) v += quarter_shift(hm.at(k, y - 1, x), hm.at(k, y + 1, x));
        }
        out.landmarks.points[k] = {to_pixel_coord(u, stride), to_pixel_coord(v, stride)};
        out.confidence[k] = peak;
    }
    return out;
}

double mse_loss(const HeatmapStack& pred, const HeatmapStack& target) {
    if (pred.channels != target.channels || pred.height != target.height || pred.width != target.width ||
        pred.values.size() != target.values.size()) {
        throw Error(ErrorCode::ShapeMismatch, "heatmap stacks differ in shape");
    }
    if (pred.values.empty()) throw Error(ErrorCode::EmptyInput, "empty heatmap stack");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.values.size(); ++i) {
        const double d = pred.values[i] - target.values[i];
        sum += d * d;
    }
    return sum / static_cast<double>(pred.values.size());
}

}  // namespace post
