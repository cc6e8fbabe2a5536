// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "post/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "post/error.hpp"

namespace post {

double distance(Point2 a, Point2 b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

std::string_view frame_name(Frame f) noexcept {
    switch (f) {
    case Frame::original: return "original";
    case Frame::crop: return "crop";
    case Frame::heatmap: return "heatmap";
    }
    return "unknown";
}

bool LandmarkSet::all_finite() const noexcept {
    return std::all_of(points.begin(), points.end(),
                       [](const Point2& p) { return std::isfinite(p.x) && std::isfinite(p.y); });
}

LandmarkSet swap_sides(const LandmarkSet& lm) {
    LandmarkSet out = lm;
    std::swap(out[Landmark::B], out[Landmark::Bp]);
    std::swap(out[Landmark::C], out[Landmark::Cp]);
    return out;
}

void validate(const BoundingBox& box) {
    if (!(box.x_min < box.x_max) || !(box.y_min < box.y_max)) {
        throw Error(ErrorCode::InvalidArgument, "bounding box must satisfy x_min < x_max and y_min < y_max");
    }
    if (!(box.confidence >= 0.0 && box.confidence <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "bounding box confidence outside [0,1]");
    }
}

Point2 apply_transform(const FrameTransform& t, Point2 p) noexcept {
    return {t.scale * p.x + t.offset_x, t.scale * p.y + t.offset_y};
}

LandmarkSet apply_transform(const FrameTransform& t, const LandmarkSet& lm) {
    if (lm.frame != t.source) {
        throw Error(ErrorCode::WrongFrame, "landmarks are in frame '" + std::string(frame_name(lm.frame)) +
                                               "', transform expects '" + std::string(frame_name(t.source)) + "'");
    }
    LandmarkSet out;
    for (std::size_t i = 0; i < kNumLandmarks; ++i) out.points[i] = apply_transform(t, lm.points[i]);
    out.frame = t.target;
    return out;
}

FrameTransform invert(const FrameTransform& t) {
    if (!(t.scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "transform scale must be positive");
    return {1.0 / t.scale, -t.offset_x / t.scale, -t.offset_y / t.scale, t.target, t.source};
}

FrameTransform compose(const FrameTransform& b, const FrameTransform& a) {
    return {b.scale * a.scale, b.scale * a.offset_x + b.offset_x, b.scale * a.offset_y + b.offset_y, a.source,
            b.target};
}

BoundingBox expand_box(const BoundingBox& box, double margin_frac, std::optional<ImageSize> bounds) {
    validate(box);
    if (!(margin_frac >= 0.0)) throw Error(ErrorCode::InvalidArgument, "margin_frac must be >= 0");
    const double margin = margin_frac * std::max(box.width(), box.height());
    BoundingBox out{box.x_min - margin, box.y_min - margin, box.x_max + margin, box.y_max + margin, box.confidence};
    if (bounds) {
        out.x_min = std::max(out.x_min, 0.0);
        out.y_min = std::max(out.y_min, 0.0);
        out.x_max = std::min(out.x_max, static_cast<double>(bounds->width));
        out.y_max = std::min(out.y_max, static_cast<double>(bounds->height));
    }
    if (!(out.x_max > out.x_min) || !(out.y_max > out.y_min)) {
        throw Error(ErrorCode::DegenerateBox, "expanded box has zero area after clipping to image bounds");
    }
    return out;
}

FrameTransform build_crop_transform(const BoundingBox& box, double margin_frac, ImageSize crop_size,
                                    std::optional<ImageSize> image_bounds) {
    if (crop_size.width <= 0 || crop_size.width != crop_size.height) {
        throw Error(ErrorCode::InvalidArgument, "crop size must be square and positive");
    }
    const BoundingBox region = expand_box(box, margin_frac, image_bounds);
    const double side = static_cast<double>(crop_size.width);
    const double scale = side / std::max(region.width(), region.height());
    const Point2 c = region.center();
    return {scale, side / 2 - scale * c.x, side / 2 - scale * c.y, Frame::original, Frame::crop};
}

Affine2 Affine2::translation(double dx, double dy) { return {1, 0, dx, 0, 1, dy}; }

Affine2 Affine2::scaling(double s) { return {s, 0, 0, 0, s, 0}; }

Affine2 Affine2::rotation_deg(double degrees) {
    const double r = degrees * std::numbers::pi / 180.0;
    const double cs = std::cos(r), sn = std::sin(r);
    return {cs, -sn, 0, sn, cs, 0};
}

Affine2 Affine2::hflip(double width) { return {-1, 0, width, 0, 1, 0}; }

Affine2 Affine2::from(const FrameTransform& t) { return {t.scale, 0, t.offset_x, 0, t.scale, t.offset_y}; }

Affine2 Affine2::inverse() const {
    const double det = determinant();
    if (det == 0.0 || !std::isfinite(det)) throw Error(ErrorCode::InvalidArgument, "affine is singular");
    const double ia = d / det, ib = -b / det, ic = -c / det, id = a / det;
    return {ia, ib, -(ia * tx + ib * ty), ic, id, -(ic * tx + id * ty)};
}

Affine2 operator*(const Affine2& l, const Affine2& r) {
    return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d, l.a * r.tx + l.b * r.ty + l.tx,
            l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d, l.c * r.tx + l.d * r.ty + l.ty};
}

PostResult post_score(const LandmarkSet& lm, double epsilon) {
    if (lm.frame != Frame::original) {
        throw Error(ErrorCode::WrongFrame, "POST score requires landmarks in the original frame, got '" +
                                               std::string(frame_name(lm.frame)) + "'");
    }
    if (!lm.all_finite()) throw Error(ErrorCode::DegenerateGeometry, "non-finite landmark coordinate");
    const Point2 a = lm[Landmark::A];
    const double bc = distance(lm[Landmark::B], lm[Landmark::C]);
    const double bc_p = distance(lm[Landmark::Bp], lm[Landmark::Cp]);
    if (bc < epsilon) throw Error(ErrorCode::DegenerateGeometry, "|BC| below epsilon");
    if (bc_p < epsilon) throw Error(ErrorCode::DegenerateGeometry, "|B'C'| below epsilon");

    PostResult r;
    r.ratio_left = distance(a, lm[Landmark::B]) / bc;
    r.ratio_right = distance(a, lm[Landmark::Bp]) / bc_p;
    r.score = (r.ratio_left + r.ratio_right) / 2;
    r.glanular_diameter = distance(lm[Landmark::C], lm[Landmark::Cp]);
    return r;
}

}  // namespace post
