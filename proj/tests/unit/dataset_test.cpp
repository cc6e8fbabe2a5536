// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <set>
#include <sstream>

#include "post/dataset.hpp"
#include "post/error.hpp"
#include "post/synth.hpp"

using namespace post;

namespace {

ImageRecord make_record(const std::string& id = "r0") {
    ImageRecord r;
    r.image_id = id;
    r.path = "images/" + id + ".png";
    r.width = 200;
    r.height = 160;
    r.landmarks.points = {Point2{100, 50}, Point2{90, 70}, Point2{112, 72}, Point2{70, 100}, Point2{132, 96}};
    r.gt_box = {60, 40, 140, 110, 1.0};
    return r;
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("30 degree rotation matches the rotation-matrix oracle") {
    const ImageRecord r = make_record();
    AugmentSpec spec;
    spec.rotate_deg = 30.0;
    const ImageRecord out = augment_record(r, spec);
    const double th = 30.0 * std::numbers::pi / 180.0;
    const double cx = r.width / 2.0, cy = r.height / 2.0;
    for (std::size_t k = 0; k < kNumLandmarks; ++k) {
        const Point2 p = r.landmarks.points[k];
        const double ex = cx + std::cos(th) * (p.x - cx) - std::sin(th) * (p.y - cy);
        const double ey = cy + std::sin(th) * (p.x - cx) + std::cos(th) * (p.y - cy);
        CHECK(std::abs(out.landmarks.points[k].x - ex) < 1e-6);
        CHECK(std::abs(out.landmarks.points[k].y - ey) < 1e-6);
    }
    CHECK(post_score(out.landmarks).score == doctest::Approx(post_score(r.landmarks).score).epsilon(1e-6));
}

TEST_CASE("horizontal flip mirrors coordinates and swaps side labels") {
    const ImageRecord r = make_record();
    AugmentSpec spec;
    spec.hflip = true;
    const ImageRecord out = augment_record(r, spec);
    auto mirror = [&](Point2 p) { return Point2{r.width - p.x, p.y}; };
    CHECK(out.landmarks[Landmark::A] == mirror(r.landmarks[Landmark::A]));
    CHECK(out.landmarks[Landmark::B] == mirror(r.landmarks[Landmark::Bp]));
    CHECK(out.landmarks[Landmark::Bp] == mirror(r.landmarks[Landmark::B]));
    CHECK(out.landmarks[Landmark::C] == mirror(r.landmarks[Landmark::Cp]));
    CHECK(out.landmarks[Landmark::Cp] == mirror(r.landmarks[Landmark::C]));
    const auto before = post_score(r.landmarks), after = post_score(out.landmarks);
    CHECK(std::abs(after.score - before.score) <= 1e-6 * before.score);
    CHECK(after.ratio_left == doctest::Approx(before.ratio_right));
    CHECK(after.ratio_right == doctest::Approx(before.ratio_left));
}

TEST_CASE("similarity augmentations preserve the score; box stays around the landmarks") {
    Rng rng(3);
    AugmentRanges ranges;
    ranges.max_translate_frac = 0.05;
    ranges.flip_probability = 0.0;
    const ImageRecord r = make_record();
    const double base = post_score(r.landmarks).score;
    int accepted = 0;
    for (int i = 0; i < 200; ++i) {
        const AugmentSpec spec = draw_augment(ranges, rng);
        CHECK(std::abs(spec.rotate_deg) <= 30.0);
        CHECK(spec.scale >= 0.75);
        CHECK(spec.scale <= 1.25);
        ImageRecord out;
        try {
            out = augment_record(r, spec);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::LandmarkOutOfFrame);
            continue;
        }
        ++accepted;
        CHECK(std::abs(post_score(out.landmarks).score - base) <= 1e-6 * base);
        CHECK_NOTHROW(validate_record(out));
    }
    CHECK(accepted > 150);
}

TEST_CASE("augmentation errors") {
    AugmentSpec spec;
    spec.rotate_deg = 31.0;
    CHECK(code_of([&] { spec.validate(); }) == ErrorCode::InvalidArgument);
    spec = {};
    spec.scale = 1.3;
    CHECK_THROWS_AS(spec.validate(), Error);
    spec = {};
    spec.translate_x_frac = 0.9;
    CHECK(code_of([&] { augment_record(make_record(), spec); }) == ErrorCode::LandmarkOutOfFrame);
}

TEST_CASE("ellipse box of a quarter turn swaps width and height") {
    const BoundingBox b{10, 20, 50, 40, 0.7};
    const auto t = Affine2::translation(30, 30) * Affine2::rotation_deg(90) * Affine2::translation(-30, -30);
    const auto out = transform_box(b, t);
    CHECK(out.width() == doctest::Approx(20.0));
    CHECK(out.height() == doctest::Approx(40.0));
    CHECK(out.center().x == doctest::Approx(t.apply(b.center()).x));
    CHECK(out.confidence == 0.7);
}

TEST_CASE("augmented pixels follow the landmarks") {
    SynthParams p;
    p.rng_seed = 4;
    const auto s = synth_generate(p, "aug");
    AugmentSpec spec;
    spec.rotate_deg = 20;
    spec.scale = 1.1;
    spec.translate_x_frac = 0.03;
    const Sample in{s.record, s.image};
    const Sample out = augment(in, spec);
    // glans mask centroid moves with the ellipse center
    const Affine2 t = augmentation_affine(spec, in.image.size());
    const Point2 c = t.apply(in.record.gt_box.center());
    const auto* px_in = in.image.pixel(int(in.record.gt_box.center().x), int(in.record.gt_box.center().y));
    const auto* px_out = out.image.pixel(int(c.x), int(c.y));
    for (int ch = 0; ch < 3; ++ch) CHECK(std::abs(int(px_in[ch]) - int(px_out[ch])) < 40);
    CHECK(out.record.gt_box.center().x == doctest::Approx(c.x).epsilon(0.05));
}

TEST_CASE("manifest round trip, schema and duplicate errors") {
    std::vector<ImageRecord> recs{make_record("a"), make_record("b")};
    recs[1].qc = {QcStatus::rejected, std::string("blurred")};
    recs[1].source = Source::synthetic;
    const auto dir = std::filesystem::temp_directory_path() / "post_manifest_test";
    std::filesystem::create_directories(dir);
    save_manifest(recs, dir / "m.jsonl");
    const auto back = load_manifest(dir / "m.jsonl");
    CHECK(back == recs);
    CHECK(data_hash(back) == data_hash(recs));
    auto changed = recs;
    changed[0].landmarks.points[0].x += 0.5;
    CHECK(data_hash(changed) != data_hash(recs));
    CHECK(resolve_image_path(dir / "m.jsonl", recs[0]) == dir / "images/a.png");

    std::istringstream dup(to_json(recs[0]).dump() + "\n" + to_json(recs[0]).dump() + "\n");
    CHECK(code_of([&] { parse_manifest(dup); }) == ErrorCode::DuplicateId);

    auto j = to_json(recs[0]);
    j.erase("landmarks");
    CHECK(code_of([&] { record_from_json(j); }) == ErrorCode::SchemaError);

    ImageRecord outside = make_record();
    outside.landmarks.points[3] = {10, 10};
    CHECK(code_of([&] { validate_record(outside); }) == ErrorCode::BoundsError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("fold plan: disjoint folds, validation inside the training portion") {
    std::vector<ImageRecord> recs;
    for (int i = 0; i < 300; ++i) recs.push_back(make_record("img" + std::to_string(i)));
    recs[7].qc.status = QcStatus::rejected;
    const FoldPlan plan = plan_folds(recs, 5, 0.2, 42);
    CHECK(plan.assignments.size() == 299);
    CHECK(!plan.assignments.count("img7"));
    std::set<std::string> all_test;
    for (int f = 0; f < 5; ++f) {
        const auto test = plan.test_ids(f), val = plan.val_ids(f), train = plan.train_ids(f);
        CHECK(test.size() >= 59);
        CHECK(test.size() <= 60);
        const std::set<std::string> t(test.begin(), test.end()), v(val.begin(), val.end());
        for (const auto& id : test) CHECK(all_test.insert(id).second);
        for (const auto& id : val) CHECK(!t.count(id));
        for (const auto& id : train) {
            CHECK(!t.count(id));
            CHECK(!v.count(id));
        }
        CHECK(val.size() == static_cast<std::size_t>(std::lround(0.2 * double(299 - test.size()))));
        CHECK(train.size() + val.size() + test.size() == 299);
    }
    CHECK(all_test.size() == 299);

    const FoldPlan again = plan_folds(recs, 5, 0.2, 42);
    CHECK(again.assignments == plan.assignments);
    CHECK(again.validation == plan.validation);
    CHECK(plan_folds(recs, 5, 0.2, 43).assignments != plan.assignments);

    const FoldPlan back = fold_plan_from_json(to_json(plan));
    CHECK(back.assignments == plan.assignments);
    CHECK(back.validation == plan.validation);

    recs.resize(3);
    CHECK(code_of([&] { plan_folds(recs, 5); }) == ErrorCode::TooFewRecords);
}
