// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "post/error.hpp"
#include "post/metrics.hpp"
#include "post/models/nms.hpp"
#include "post/random.hpp"
#include "../support/oracles.hpp"

using namespace post;
using namespace post::testing;

namespace {

LandmarkSet random_set(Rng& rng) {
    LandmarkSet lm;
    for (auto& p : lm.points) p = {rng.uniform(0, 400), rng.uniform(0, 400)};
    return lm;
}

BoundingBox random_box(Rng& rng, double conf) {
    const double x = rng.uniform(0, 60), y = rng.uniform(0, 60);
    return {x, y, x + rng.uniform(5, 40), y + rng.uniform(5, 40), conf};
}

}  // namespace

TEST_CASE("nme and nme_batch match the per-landmark loop") {
    Rng rng(5);
    std::vector<LandmarkSet> preds, gts;
    std::vector<double> expect;
    for (int i = 0; i < 1000; ++i) {
        preds.push_back(random_set(rng));
        gts.push_back(random_set(rng));
        expect.push_back(nme_oracle(preds.back(), gts.back()));
    }
    const auto batch = nme_batch(preds, gts);
    REQUIRE(batch.size() == 1000);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        worst = std::max(worst, std::abs(batch[i] - expect[i]));
        worst = std::max(worst, std::abs(nme(preds[i], gts[i]) - expect[i]));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("nme: one landmark off by the diameter gives exactly 0.2") {
    LandmarkSet gt;
    gt.points = {Point2{50, 10}, Point2{40, 30}, Point2{60, 30}, Point2{20, 60}, Point2{80, 60}};
    for (int k = 0; k < 5; ++k) {
        LandmarkSet p = gt;
        p.points[k].y += 60.0;  // |C - C'| = 60
        CHECK(nme(p, gt) == 0.2);
        CHECK(nme_batch({p}, {gt})[0] == 0.2);
    }
    CHECK(nme(gt, gt) == 0.0);
}

TEST_CASE("nme errors") {
    LandmarkSet gt;
    gt.points = {Point2{50, 10}, Point2{40, 30}, Point2{60, 30}, Point2{20, 60}, Point2{20, 60}};
    try {
        nme(gt, gt);
        FAIL("degenerate normalizer accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateNormalizer);
    }
    CHECK_THROWS_AS(nme_batch({gt}, {}), Error);
    LandmarkSet crop = gt;
    crop.frame = Frame::crop;
    CHECK_THROWS_AS(nme(crop, gt), Error);
}

TEST_CASE("failure rate equals the counting oracle") {
    Rng rng(8);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> v;
        const int n = 1 + static_cast<int>(rng.below(200));
        int over = 0;
        for (int i = 0; i < n; ++i) {
            // include exact threshold hits: strictly greater counts
            const double x = rng.bernoulli(0.1) ? 0.1 : rng.uniform(0.0, 0.2);
            v.push_back(x);
            if (x > 0.1) ++over;
        }
        CHECK(failure_rate(v, 0.1) == double(over) / double(n));
    }
    CHECK_THROWS_AS(failure_rate({}, 0.1), Error);
}

TEST_CASE("iou examples") {
    CHECK(iou({0, 0, 10, 10, 1}, {0, 0, 10, 10, 1}) == 1.0);
    CHECK(iou({0, 0, 10, 10, 1}, {10, 0, 20, 10, 1}) == 0.0);
    CHECK(iou({0, 0, 10, 10, 1}, {5, 0, 15, 10, 1}) == doctest::Approx(50.0 / 150.0));
}

TEST_CASE("average precision equals the exhaustive-cutoff oracle") {
    Rng rng(99);
    for (int inst = 0; inst < 100; ++inst) {
        std::vector<DetectionRecord> recs;
        const int images = 1 + static_cast<int>(rng.below(4));
        int boxes = 0;
        for (int r = 0; r < images; ++r) {
            DetectionRecord rec;
            rec.image_id = std::to_string(r);
            rec.ground_truth.push_back(random_box(rng, 1.0));
            const int np = static_cast<int>(rng.below(4));
            for (int i = 0; i < np && boxes < 10; ++i, ++boxes) {
                // coarse confidences so ties occur
                const double conf = (1 + rng.below(5)) / 5.0 - 0.05;
                BoundingBox b = rng.bernoulli(0.6) ? rec.ground_truth[0] : random_box(rng, conf);
                b.x_min += rng.uniform(-4, 4);
                b.x_max += rng.uniform(-4, 4);
                b.confidence = conf;
                rec.predictions.push_back(b);
            }
            recs.push_back(rec);
        }
        CHECK(average_precision(recs, 0.5) == ap_oracle(recs, 0.5));
        const double ap = average_precision(recs, 0.5);
        CHECK(mean_average_precision({ap}) == ap);
    }
}

TEST_CASE("average precision examples and sensitivity") {
    const BoundingBox gt{0, 0, 10, 10, 1};
    std::vector<DetectionRecord> perfect{{"a", {{0, 0, 10, 10, 0.9}}, {gt}}, {"b", {{0, 0, 10, 10, 0.8}}, {gt}}};
    CHECK(average_precision(perfect) == 1.0);
    CHECK(sensitivity(perfect, 0.5, 0.25) == 1.0);
    // a confident false positive ahead of the only hit halves precision
    std::vector<DetectionRecord> fp_first{{"a", {{50, 50, 60, 60, 0.9}, {0, 0, 10, 10, 0.5}}, {gt}}};
    CHECK(average_precision(fp_first) == 0.5);
    // below the operating threshold the hit does not count toward sensitivity
    std::vector<DetectionRecord> low{{"a", {{0, 0, 10, 10, 0.1}}, {gt}}};
    CHECK(sensitivity(low, 0.5, 0.25) == 0.0);
    CHECK(average_precision(low) == 1.0);
    CHECK_THROWS_AS(average_precision({{"a", {}, {}}}), Error);
    CHECK_THROWS_AS(mean_average_precision({}), Error);
}

TEST_CASE("nms matches the quadratic oracle") {
    Rng rng(17);
    for (int inst = 0; inst < 200; ++inst) {
        std::vector<BoundingBox> boxes;
        const int n = static_cast<int>(rng.below(30));
        for (int i = 0; i < n; ++i) boxes.push_back(random_box(rng, std::round(rng.uniform(0, 1) * 10) / 10.0));
        const double thr = rng.uniform(0.2, 0.8);
        const auto got = models::nms(boxes, thr, 0.25);
        const auto want = nms_oracle(boxes, thr, 0.25);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == want[i]);
    }
    CHECK_THROWS_AS(models::nms({}, 0.0, 0.25), Error);
    CHECK_THROWS_AS(models::nms({}, 0.5, 1.0), Error);
}

TEST_CASE("fold aggregation: mean and population std of fold means, pooled failure rate") {
    std::vector<FoldMetrics> folds;
    const double means[5] = {0.05, 0.07, 0.06, 0.09, 0.08};
    for (int f = 4; f >= 0; --f) {  // out of order on purpose
        FoldMetrics m;
        m.fold = f;
        m.map = 0.9 + 0.01 * f;
        m.sensitivity = 1.0;
        m.landmarks = summarize_nme({means[f] - 0.01, means[f] + 0.01, means[f] + f * 0.03 + 0.01}, {0.001 * (f + 1)});
        folds.push_back(m);
    }
    const auto rep = aggregate_folds(folds);
    REQUIRE(rep.folds.size() == 5);
    for (int f = 0; f < 5; ++f) CHECK(rep.folds[f].fold == f);

    double fold_means[5], s = 0;
    for (int f = 0; f < 5; ++f) {
        fold_means[f] = (3 * means[f] + f * 0.03 + 0.01) / 3.0;
        s += fold_means[f];
    }
    const double mu = s / 5.0;
    double ss = 0;
    for (double m : fold_means) ss += (m - mu) * (m - mu);
    CHECK(rep.nme_mean == doctest::Approx(mu).epsilon(1e-12));
    CHECK(rep.nme_std == doctest::Approx(std::sqrt(ss / 5.0)).epsilon(1e-12));
    CHECK(rep.mse_mean == doctest::Approx(0.003));
    CHECK(rep.map == doctest::Approx(0.92));
    // pooled: images above 0.1 across all folds
    int over = 0;
    for (int f = 0; f < 5; ++f)
        for (double v : {means[f] - 0.01, means[f] + 0.01, means[f] + f * 0.03 + 0.01}) over += v > 0.1;
    CHECK(rep.fr_at_0p1 == doctest::Approx(over / 15.0));
    const auto j = to_json(rep);
    for (const char* key : {"nme_mean", "nme_std", "fr_at_0p1", "mse_mean", "mse_std", "map", "sensitivity", "config"})
        CHECK(j.contains(key));

    folds[2].failed = true;
    const auto with_failure = aggregate_folds(folds);
    CHECK(with_failure.failed_folds == 1);
    CHECK(with_failure.folds.size() == 5);
    for (auto& f : folds) f.failed = true;
    CHECK_THROWS_AS(aggregate_folds(folds), Error);
}
