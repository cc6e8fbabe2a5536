// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace post {

/// Pixel coordinates: origin top-left, x rightward, y downward. Pixel (i, j)
/// covers [i, i+1) x [j, j+1); its center is at (i + 0.5, j + 0.5).
struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }

double distance(Point2 a, Point2 b) noexcept;

enum class Frame { original, crop, heatmap };

std::string_view frame_name(Frame f) noexcept;

/// Fixed landmark order used everywhere (heatmap channels, arrays, wire keys).
enum class Landmark : std::size_t { A = 0, B = 1, Bp = 2, C = 3, Cp = 4 };

inline constexpr std::size_t kNumLandmarks = 5;
inline constexpr std::array<std::string_view, kNumLandmarks> kLandmarkKeys = {"A", "B", "Bp", "C", "Cp"};

struct LandmarkSet {
    std::array<Point2, kNumLandmarks> points{};
    Frame frame = Frame::original;

    Point2& operator[](Landmark l) { return points[static_cast<std::size_t>(l)]; }
    const Point2& operator[](Landmark l) const { return points[static_cast<std::size_t>(l)]; }

    bool all_finite() const noexcept;

    friend bool operator==(const LandmarkSet&, const LandmarkSet&) = default;
};

/// Exchange the left/right labels (B<->B', C<->C'); A is midline.
LandmarkSet swap_sides(const LandmarkSet& lm);

struct BoundingBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;
    double confidence = 1.0;

    double width() const noexcept { return x_max - x_min; }
    double height() const noexcept { return y_max - y_min; }
    double area() const noexcept { return width() * height(); }
    Point2 center() const noexcept { return {(x_min + x_max) / 2, (y_min + y_max) / 2}; }
    bool contains(Point2 p) const noexcept {
        return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
    }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Throws InvalidArgument unless x_min < x_max, y_min < y_max and confidence in [0,1].
void validate(const BoundingBox& box);

struct ImageSize {
    int width = 0;
    int height = 0;
};

/// Isotropic similarity without rotation: p' = scale * p + offset.
struct FrameTransform {
    double scale = 1.0;
    double offset_x = 0.0;
    double offset_y = 0.0;
    Frame source = Frame::original;
    Frame target = Frame::original;
};

Point2 apply_transform(const FrameTransform& t, Point2 p) noexcept;

/// Maps every point and retags the frame. Throws WrongFrame if lm.frame != t.source.
LandmarkSet apply_transform(const FrameTransform& t, const LandmarkSet& lm);

FrameTransform invert(const FrameTransform& t);

/// b after a.
FrameTransform compose(const FrameTransform& b, const FrameTransform& a);

/// Grows the box by margin_frac * max side on every side, then clips to bounds when given.
BoundingBox expand_box(const BoundingBox& box, double margin_frac, std::optional<ImageSize> bounds = std::nullopt);

/// Letterbox mapping of the margin-expanded box into a square crop: the longer
/// side fills the crop, the shorter side is centered with symmetric padding.
FrameTransform build_crop_transform(const BoundingBox& box, double margin_frac, ImageSize crop_size,
                                    std::optional<ImageSize> image_bounds = std::nullopt);

/// General 2x3 affine, p' = M p + t. Used by augmentation where rotation and
/// flips leave the FrameTransform family.
struct Affine2 {
    double a = 1.0, b = 0.0, tx = 0.0;
    double c = 0.0, d = 1.0, ty = 0.0;

    static Affine2 identity() { return {}; }
    static Affine2 translation(double dx, double dy);
    static Affine2 scaling(double s);
    static Affine2 rotation_deg(double degrees);
    /// x -> width - x
    static Affine2 hflip(double width);
    static Affine2 from(const FrameTransform& t);

    Point2 apply(Point2 p) const noexcept { return {a * p.x + b * p.y + tx, c * p.x + d * p.y + ty}; }
    Affine2 inverse() const;
    double determinant() const noexcept { return a * d - b * c; }
};

/// (lhs * rhs)(p) == lhs(rhs(p))
Affine2 operator*(const Affine2& lhs, const Affine2& rhs);

struct PostResult {
    double ratio_left = 0.0;   ///< |AB| / |BC|
    double ratio_right = 0.0;  ///< |AB'| / |B'C'|
    double score = 0.0;
    double glanular_diameter = 0.0;  ///< |CC'|, pixels

    friend bool operator==(const PostResult&, const PostResult&) = default;
};

inline constexpr double kDefaultDegeneracyEpsilon = 1e-6;

/// POST score of landmarks in the original image frame.
PostResult post_score(const LandmarkSet& lm, double epsilon = kDefaultDegeneracyEpsilon);

}  // namespace post
