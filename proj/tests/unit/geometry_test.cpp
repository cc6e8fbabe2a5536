// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "post/error.hpp"
#include "post/geometry.hpp"
#include "post/random.hpp"

using namespace post;

namespace {

LandmarkSet make_set(Point2 a, Point2 b, Point2 bp, Point2 c, Point2 cp, Frame f = Frame::original) {
    LandmarkSet lm;
    lm[Landmark::A] = a;
    lm[Landmark::B] = b;
    lm[Landmark::Bp] = bp;
    lm[Landmark::C] = c;
    lm[Landmark::Cp] = cp;
    lm.frame = f;
    return lm;
}

LandmarkSet random_set(Rng& rng) {
    LandmarkSet lm;
    for (auto& p : lm.points) p = {rng.uniform(0, 500), rng.uniform(0, 500)};
    return lm;
}

}  // namespace

TEST_CASE("crop transform: full square box is the identity") {
    const auto t = build_crop_transform({0, 0, 256, 256, 1.0}, 0.0, {256, 256});
    CHECK(t.scale == doctest::Approx(1.0));
    CHECK(t.offset_x == doctest::Approx(0.0));
    CHECK(t.offset_y == doctest::Approx(0.0));
    CHECK(t.source == Frame::original);
    CHECK(t.target == Frame::crop);
}

TEST_CASE("crop transform: square box maps corners onto crop corners") {
    const auto t = build_crop_transform({100, 50, 300, 250, 0.9}, 0.0, {256, 256});
    CHECK(t.scale == doctest::Approx(1.28));
    const Point2 tl = apply_transform(t, Point2{100, 50});
    const Point2 br = apply_transform(t, Point2{300, 250});
    CHECK(tl.x == doctest::Approx(0.0));
    CHECK(tl.y == doctest::Approx(0.0));
    CHECK(br.x == doctest::Approx(256.0));
    CHECK(br.y == doctest::Approx(256.0));
}

TEST_CASE("crop transform: wide box is letterboxed with symmetric vertical padding") {
    const auto t = build_crop_transform({0, 0, 200, 100, 1.0}, 0.0, {256, 256});
    CHECK(t.scale == doctest::Approx(1.28));
    const Point2 tl = apply_transform(t, Point2{0, 0});
    const Point2 br = apply_transform(t, Point2{200, 100});
    CHECK(tl.x == doctest::Approx(0.0));
    CHECK(tl.y == doctest::Approx(64.0));
    CHECK(br.y == doctest::Approx(256.0 - 64.0));
}

TEST_CASE("crop transform: margin grows the box by a fraction of its longer side") {
    const auto t = build_crop_transform({100, 100, 200, 150, 1.0}, 0.10, {256, 256});
    // expanded to (90, 90, 210, 160): 120 px wide
    CHECK(t.scale == doctest::Approx(256.0 / 120.0));
    CHECK(apply_transform(t, Point2{90, 125}).x == doctest::Approx(0.0));
}

TEST_CASE("crop transform: margin is clipped to image bounds") {
    const auto t = build_crop_transform({0, 0, 100, 100, 1.0}, 0.5, {256, 256}, ImageSize{120, 120});
    CHECK(t.scale == doctest::Approx(256.0 / 120.0));
}

TEST_CASE("crop transform: errors") {
    CHECK_THROWS_AS(build_crop_transform({0, 0, 10, 10, 1.0}, 0.0, {256, 128}), Error);
    try {
        build_crop_transform({300, 300, 400, 400, 1.0}, 0.0, {256, 256}, ImageSize{200, 200});
        FAIL("expected DegenerateBox");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateBox);
    }
    CHECK_THROWS_AS(build_crop_transform({10, 10, 5, 20, 1.0}, 0.0, {256, 256}), Error);
}

TEST_CASE("crop transform is isotropic") {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const double x0 = rng.uniform(0, 300), y0 = rng.uniform(0, 300);
        const BoundingBox box{x0, y0, x0 + rng.uniform(5, 200), y0 + rng.uniform(5, 200), 1.0};
        const auto t = build_crop_transform(box, rng.uniform(0, 0.3), {256, 256});
        const Point2 o = apply_transform(t, Point2{0, 0});
        const Point2 ex = apply_transform(t, Point2{1, 0}) - o;
        const Point2 ey = apply_transform(t, Point2{0, 1}) - o;
        CHECK(std::hypot(ex.x, ex.y) == doctest::Approx(std::hypot(ey.x, ey.y)).epsilon(1e-12));
    }
}

TEST_CASE("apply_transform examples") {
    const FrameTransform id;
    CHECK(apply_transform(id, Point2{7.5, 3.25}) == Point2{7.5, 3.25});
    const FrameTransform t{2.0, 10.0, 0.0, Frame::original, Frame::crop};
    CHECK(apply_transform(t, Point2{1, 1}) == Point2{12, 2});
}

TEST_CASE("apply then invert is the identity for random transforms") {
    Rng rng(11);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const FrameTransform t{std::exp(rng.uniform(-3, 3)), rng.uniform(-500, 500), rng.uniform(-500, 500),
                               Frame::original, Frame::crop};
        const Point2 p{rng.uniform(-1000, 1000), rng.uniform(-1000, 1000)};
        const Point2 back = apply_transform(invert(t), apply_transform(t, p));
        worst = std::max(worst, distance(back, p));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("landmark transform retags the frame and checks the source") {
    LandmarkSet lm = make_set({1, 2}, {3, 4}, {5, 6}, {7, 8}, {9, 10});
    const FrameTransform t{2.0, 1.0, 1.0, Frame::original, Frame::crop};
    const LandmarkSet c = apply_transform(t, lm);
    CHECK(c.frame == Frame::crop);
    CHECK(c[Landmark::Cp] == Point2{19, 21});
    CHECK_THROWS_AS(apply_transform(t, c), Error);
    const LandmarkSet back = apply_transform(invert(t), c);
    CHECK(back.frame == Frame::original);
}

TEST_CASE("post score: symmetric construction gives sqrt(2)") {
    const auto r = post_score(make_set({0, 0}, {-1, -1}, {1, -1}, {-1, -2}, {1, -2}));
    CHECK(r.ratio_left == doctest::Approx(std::sqrt(2.0)));
    CHECK(r.ratio_right == doctest::Approx(std::sqrt(2.0)));
    CHECK(r.score == doctest::Approx(std::sqrt(2.0)));
    CHECK(r.glanular_diameter == doctest::Approx(2.0));
}

TEST_CASE("post score: asymmetric arithmetic case") {
    const auto r = post_score(make_set({0, 0}, {3, 4}, {-2, 0}, {3, 9}, {-3, 0}));
    CHECK(r.ratio_left == doctest::Approx(1.0));
    CHECK(r.ratio_right == doctest::Approx(2.0));
    CHECK(r.score == doctest::Approx(1.5));
    CHECK(r.score == (r.ratio_left + r.ratio_right) / 2);
}

TEST_CASE("post score: degenerate and wrong-frame inputs") {
    try {
        post_score(make_set({0, 0}, {1, 1}, {2, 2}, {1, 1}, {3, 3}));
        FAIL("expected DegenerateGeometry");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateGeometry);
    }
    try {
        post_score(make_set({0, 0}, {1, 1}, {2, 2}, {5, 1}, {3, 3}, Frame::crop));
        FAIL("expected WrongFrame");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::WrongFrame);
    }
    // a configurable epsilon catches near-coincident points
    CHECK_THROWS_AS(post_score(make_set({0, 0}, {1, 1}, {2, 2}, {1.01, 1}, {3, 3}), 0.1), Error);
}

TEST_CASE("post score: swapping sides exchanges the ratios") {
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        const LandmarkSet lm = random_set(rng);
        const auto r = post_score(lm);
        const auto s = post_score(swap_sides(lm));
        CHECK(s.ratio_left == r.ratio_right);
        CHECK(s.ratio_right == r.ratio_left);
        CHECK(s.score == doctest::Approx(r.score).epsilon(1e-15));
    }
}

TEST_CASE("affine helpers compose and invert") {
    const Affine2 t = Affine2::translation(3, -2) * Affine2::rotation_deg(30) * Affine2::scaling(1.5);
    const Point2 p{4, 7};
    const Point2 q = t.inverse().apply(t.apply(p));
    CHECK(q.x == doctest::Approx(p.x));
    CHECK(q.y == doctest::Approx(p.y));
    CHECK(Affine2::hflip(100).apply({10, 5}).x == doctest::Approx(90));
    CHECK(Affine2::hflip(100).determinant() < 0);
}
