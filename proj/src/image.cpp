// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "post/image.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "post/error.hpp"

namespace post {

namespace {

Image from_bgr(const cv::Mat& bgr) {
    Image img(bgr.cols, bgr.rows);
    for (int y = 0; y < bgr.rows; ++y) {
        const auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < bgr.cols; ++x) {
            auto* p = img.pixel(x, y);
            p[0] = row[x][2];
            p[1] = row[x][1];
            p[2] = row[x][0];
        }
    }
    return img;
}

cv::Mat to_bgr(const Image& img) {
    cv::Mat bgr(img.height, img.width, CV_8UC3);
    for (int y = 0; y < img.height; ++y) {
        auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < img.width; ++x) {
            const auto* p = img.pixel(x, y);
            row[x] = cv::Vec3b(p[2], p[1], p[0]);
        }
    }
    return bgr;
}

// Bilinear sample at continuous pixel coordinates (pixel centers at +0.5).
inline void sample(const Image& src, double x, double y, float out[3]) {
    const double fx = x - 0.5, fy = y - 0.5;
    const int x0 = static_cast<int>(std::floor(fx)), y0 = static_cast<int>(std::floor(fy));
    const float wx = static_cast<float>(fx - x0), wy = static_cast<float>(fy - y0);
    const float w[4] = {(1 - wx) * (1 - wy), wx * (1 - wy), (1 - wx) * wy, wx * wy};
    const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
    const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
    out[0] = out[1] = out[2] = 0.0f;
    for (int i = 0; i < 4; ++i) {
        if (xs[i] < 0 || ys[i] < 0 || xs[i] >= src.width || ys[i] >= src.height) {
            for (int c = 0; c < 3; ++c) out[c] += w[i] * kPadValue;
        } else {
            const auto* p = src.pixel(xs[i], ys[i]);
            for (int c = 0; c < 3; ++c) out[c] += w[i] * p[c];
        }
    }
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
    cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (bgr.empty()) throw Error(ErrorCode::IoError, "cannot decode image " + path.string());
    return from_bgr(bgr);
}

Image decode_image(std::span<const std::uint8_t> bytes) {
    if (bytes.empty()) throw Error(ErrorCode::IoError, "empty image payload");
    cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<std::uint8_t*>(bytes.data()));
    cv::Mat bgr = cv::imdecode(buf, cv::IMREAD_COLOR);
    if (bgr.empty()) throw Error(ErrorCode::IoError, "payload is not a decodable PNG/JPEG image");
    return from_bgr(bgr);
}

void save_png(const Image& img, const std::filesystem::path& path) {
    if (!cv::imwrite(path.string(), to_bgr(img))) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

std::vector<std::uint8_t> encode_png(const Image& img) {
    std::vector<std::uint8_t> out;
    if (!cv::imencode(".png", to_bgr(img), out)) throw Error(ErrorCode::IoError, "PNG encoding failed");
    return out;
}

Image warp_affine(const Image& src, const Affine2& dst_from_src, int width, int height) {
    const Affine2 inv = dst_from_src.inverse();
    Image dst(width, height);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < height; ++y) {
        float v[3];
        for (int x = 0; x < width; ++x) {
            const Point2 s = inv.apply({x + 0.5, y + 0.5});
            sample(src, s.x, s.y, v);
            auto* p = dst.pixel(x, y);
            for (int c = 0; c < 3; ++c) p[c] = static_cast<std::uint8_t>(std::clamp(std::lround(v[c]), 0L, 255L));
        }
    }
    return dst;
}

void warp_to_planar(const Image& src, const Affine2& dst_from_src, int width, int height, std::span<float> out) {
    const std::size_t plane = std::size_t(width) * height;
    if (out.size() < 3 * plane) throw Error(ErrorCode::ShapeMismatch, "planar output buffer too small");
    const Affine2 inv = dst_from_src.inverse();
#pragma omp parallel for schedule(static)
    for (int y = 0; y < height; ++y) {
        float v[3];
        for (int x = 0; x < width; ++x) {
            const Point2 s = inv.apply({x + 0.5, y + 0.5});
            sample(src, s.x, s.y, v);
            for (int c = 0; c < 3; ++c) out[c * plane + std::size_t(y) * width + x] = normalize_channel(v[c]);
        }
    }
}

}  // namespace post
