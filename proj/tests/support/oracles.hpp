// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

// Brute-force reference implementations used by unit and acceptance tests.
// Written without calling the library routines they check.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "post/geometry.hpp"
#include "post/metrics.hpp"

namespace post::testing {

// Per-landmark loop written independently of nme(): hypot per point, then mean.
inline double nme_oracle(const LandmarkSet& p, const LandmarkSet& g) {
    const double d = std::hypot(g.points[3].x - g.points[4].x, g.points[3].y - g.points[4].y);
    double s = 0.0;
    for (int k = 0; k < 5; ++k) s += std::hypot(p.points[k].x - g.points[k].x, p.points[k].y - g.points[k].y) / d;
    return s / 5.0;
}

inline double iou_oracle(const BoundingBox& a, const BoundingBox& b) {
    const double ix = std::max(0.0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
    const double iy = std::max(0.0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
    const double inter = ix * iy;
    const double uni = (a.x_max - a.x_min) * (a.y_max - a.y_min) + (b.x_max - b.x_min) * (b.y_max - b.y_min) - inter;
    return inter / uni;
}

struct Pred {
    double conf;
    std::size_t rec, idx;
};

// For each distinct cutoff, rematch the predictions at or above it from scratch
// and read off one (recall, precision) point; AP sums recall steps times the
// best precision at any cutoff with recall at least as high.
inline double ap_oracle(const std::vector<DetectionRecord>& recs, double thr) {
    std::vector<Pred> all;
    std::size_t npos = 0;
    for (std::size_t r = 0; r < recs.size(); ++r) {
        npos += recs[r].ground_truth.size();
        for (std::size_t i = 0; i < recs[r].predictions.size(); ++i) all.push_back({recs[r].predictions[i].confidence, r, i});
    }
    std::vector<double> cutoffs;
    for (const auto& p : all) cutoffs.push_back(p.conf);
    std::sort(cutoffs.begin(), cutoffs.end(), std::greater<>());
    cutoffs.erase(std::unique(cutoffs.begin(), cutoffs.end()), cutoffs.end());

    std::vector<double> rec_pts, prec_pts;
    for (double c : cutoffs) {
        std::vector<Pred> sel;
        for (const auto& p : all)
            if (p.conf >= c) sel.push_back(p);
        std::stable_sort(sel.begin(), sel.end(), [](const Pred& a, const Pred& b) { return a.conf > b.conf; });
        std::vector<std::vector<bool>> used(recs.size());
        for (std::size_t r = 0; r < recs.size(); ++r) used[r].assign(recs[r].ground_truth.size(), false);
        std::size_t tp = 0;
        for (const auto& p : sel) {
            double best = -1;
            std::size_t bi = 0;
            for (std::size_t g = 0; g < recs[p.rec].ground_truth.size(); ++g) {
                if (used[p.rec][g]) continue;
                const double v = iou_oracle(recs[p.rec].predictions[p.idx], recs[p.rec].ground_truth[g]);
                if (v > best) {
                    best = v;
                    bi = g;
                }
            }
            if (best >= thr) {
                used[p.rec][bi] = true;
                ++tp;
            }
        }
        rec_pts.push_back(double(tp) / double(npos));
        prec_pts.push_back(double(tp) / double(sel.size()));
    }
    double ap = 0.0, prev = 0.0;
    for (std::size_t j = 0; j < rec_pts.size(); ++j) {
        double best_p = 0.0;
        for (std::size_t i = j; i < rec_pts.size(); ++i) best_p = std::max(best_p, prec_pts[i]);
        ap += (rec_pts[j] - prev) * best_p;
        prev = rec_pts[j];
    }
    return ap;
}

inline std::vector<BoundingBox> nms_oracle(const std::vector<BoundingBox>& boxes, double iou_thr, double conf_thr) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < boxes.size(); ++i)
        if (boxes[i].confidence >= conf_thr) order.push_back(i);
    // selection by repeated max search, first index wins ties
    std::vector<bool> done(boxes.size(), false);
    std::vector<BoundingBox> kept;
    for (std::size_t round = 0; round < order.size(); ++round) {
        std::size_t best = boxes.size();
        for (std::size_t i : order) {
            if (done[i]) continue;
            if (best == boxes.size() || boxes[i].confidence > boxes[best].confidence) best = i;
        }
        done[best] = true;
        bool suppressed = false;
        for (const auto& k : kept) suppressed = suppressed || iou_oracle(k, boxes[best]) > iou_thr;
        if (!suppressed) kept.push_back(boxes[best]);
    }
    return kept;
}

}  // namespace post::testing
