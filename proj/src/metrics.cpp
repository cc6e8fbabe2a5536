// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "post/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "post/error.hpp"

namespace post {

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
    const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

namespace {

struct RankedPrediction {
    double confidence;
    std::size_t record;
    std::size_t index;
};

std::vector<RankedPrediction> rank_predictions(const std::vector<DetectionRecord>& records, double min_confidence) {
    std::vector<RankedPrediction> ranked;
    for (std::size_t r = 0; r < records.size(); ++r) {
        for (std::size_t i = 0; i < records[r].predictions.size(); ++i) {
            const double c = records[r].predictions[i].confidence;
            if (c >= min_confidence) ranked.push_back({c, r, i});
        }
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const RankedPrediction& a, const RankedPrediction& b) { return a.confidence > b.confidence; });
    return ranked;
}

std::size_t count_ground_truth(const std::vector<DetectionRecord>& records) {
    std::size_t n = 0;
    for (const auto& r : records) n += r.ground_truth.size();
    return n;
}

// Walks ranked predictions, calling on_result(k, is_tp) after each greedy match decision.
template <typename F>
void greedy_match(const std::vector<DetectionRecord>& records, const std::vector<RankedPrediction>& ranked,
                  double iou_threshold, F&& on_result) {
    std::vector<std::vector<bool>> taken(records.size());
    for (std::size_t r = 0; r < records.size(); ++r) taken[r].assign(records[r].ground_truth.size(), false);

    for (std::size_t k = 0; k < ranked.size(); ++k) {
        const auto& rec = records[ranked[k].record];
        const BoundingBox& p = rec.predictions[ranked[k].index];
        double best_iou = -1.0;
        std::size_t best = 0;
        for (std::size_t g = 0; g < rec.ground_truth.size(); ++g) {
            if (taken[ranked[k].record][g]) continue;
            const double v = iou(p, rec.ground_truth[g]);
            if (v > best_iou) {
                best_iou = v;
                best = g;
            }
        }
        const bool tp = best_iou >= iou_threshold;
        if (tp) taken[ranked[k].record][best] = true;
        on_result(k, tp);
    }
}

}  // namespace

double average_precision(const std::vector<DetectionRecord>& records, double iou_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "iou_threshold must lie in (0,1)");
    }
    const std::size_t npos = count_ground_truth(records);
    if (npos == 0) throw Error(ErrorCode::EmptyGroundTruth, "AP undefined without ground truth");

    const auto ranked = rank_predictions(records, -std::numeric_limits<double>::infinity());
    std::vector<double> recall, precision;
    std::size_t tp = 0, fp = 0;
    greedy_match(records, ranked, iou_threshold, [&](std::size_t k, bool hit) {
        hit ? ++tp : ++fp;
        const bool group_end = k + 1 == ranked.size() || ranked[k + 1].confidence != ranked[k].confidence;
        if (group_end) {
            recall.push_back(static_cast<double>(tp) / static_cast<double>(npos));
            precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
        }
    });

    // precision envelope, right to left
    for (std::size_t i = precision.size(); i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);

    double ap = 0.0, prev_recall = 0.0;
    for (std::size_t i = 0; i < recall.size(); ++i) {
        ap += (recall[i] - prev_recall) * precision[i];
        prev_recall = recall[i];
    }
    return ap;
}

double mean_average_precision(const std::vector<double>& aps) {
    if (aps.empty()) throw Error(ErrorCode::EmptyInput, "mAP needs at least one class");
    double s = 0.0;
    for (double a : aps) s += a;
    return s / static_cast<double>(aps.size());
}

double sensitivity(const std::vector<DetectionRecord>& records, double iou_threshold, double confidence_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold < 1.0) || !(confidence_threshold > 0.0 && confidence_threshold < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "thresholds must lie in (0,1)");
    }
    const std::size_t npos = count_ground_truth(records);
    if (npos == 0) throw Error(ErrorCode::EmptyGroundTruth, "sensitivity undefined without ground truth");
    std::size_t tp = 0;
    greedy_match(records, rank_predictions(records, confidence_threshold), iou_threshold,
                 [&](std::size_t, bool hit) { tp += hit ? 1 : 0; });
    return static_cast<double>(tp) / static_cast<double>(npos);
}

double nme(const LandmarkSet& pred, const LandmarkSet& gt, double epsilon) {
    if (pred.frame != gt.frame) throw Error(ErrorCode::WrongFrame, "NME needs both landmark sets in one frame");
    const double d = distance(gt[Landmark::C], gt[Landmark::Cp]);
    if (!(d >= epsilon)) throw Error(ErrorCode::DegenerateNormalizer, "ground-truth glanular diameter below epsilon");
    double sum = 0.0;
    for (std::size_t k = 0; k < kNumLandmarks; ++k) sum += distance(pred.points[k], gt.points[k]) / d;
    return sum / static_cast<double>(kNumLandmarks);
}

std::vector<double> nme_batch(const std::vector<LandmarkSet>& pred, const std::vector<LandmarkSet>& gt,
                              double epsilon) {
    if (pred.size() != gt.size()) throw Error(ErrorCode::ShapeMismatch, "prediction and ground-truth batches differ in size");
    const std::size_t n = pred.size();
    constexpr std::size_t K = kNumLandmarks;
    // x/y planes: image-major, landmark-minor
    std::vector<double> px(n * K), py(n * K), gx(n * K), gy(n * K), diam(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (pred[i].frame != gt[i].frame) throw Error(ErrorCode::WrongFrame, "NME needs both landmark sets in one frame");
        const double d = distance(gt[i][Landmark::C], gt[i][Landmark::Cp]);
        if (!(d >= epsilon)) throw Error(ErrorCode::DegenerateNormalizer, "ground-truth glanular diameter below epsilon");
        diam[i] = d;
        for (std::size_t k = 0; k < K; ++k) {
            px[i * K + k] = pred[i].points[k].x;
            py[i * K + k] = pred[i].points[k].y;
            gx[i * K + k] = gt[i].points[k].x;
            gy[i * K + k] = gt[i].points[k].y;
        }
    }
    std::vector<double> err(n * K), out(n);
#pragma omp parallel for simd schedule(static)
    for (std::size_t j = 0; j < n * K; ++j) {
        const double dx = px[j] - gx[j], dy = py[j] - gy[j];
        err[j] = std::sqrt(dx * dx + dy * dy);
    }
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < K; ++k) s += err[i * K + k] / diam[i];
        out[i] = s / static_cast<double>(K);
    }
    return out;
}

double failure_rate(const std::vector<double>& nmes, double threshold) {
    if (nmes.empty()) throw Error(ErrorCode::EmptyInput, "failure rate of an empty list");
    const auto failures = std::count_if(nmes.begin(), nmes.end(), [&](double v) { return v > threshold; });
    return static_cast<double>(failures) / static_cast<double>(nmes.size());
}

namespace {

std::pair<double, double> mean_and_population_std(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / n)};
}

}  // namespace

NmeResult summarize_nme(std::vector<double> per_image_nme, std::vector<double> per_image_mse, double fr_threshold) {
    if (per_image_nme.empty()) throw Error(ErrorCode::EmptyInput, "no per-image NME values");
    NmeResult r;
    std::tie(r.mean, r.std) = mean_and_population_std(per_image_nme);
    r.failure_rate = failure_rate(per_image_nme, fr_threshold);
    if (!per_image_mse.empty()) r.mse = mean_and_population_std(per_image_mse).first;
    r.per_image_nme = std::move(per_image_nme);
    r.per_image_mse = std::move(per_image_mse);
    return r;
}

EvalReport aggregate_folds(const std::vector<FoldMetrics>& per_fold) {
    EvalReport rep;
    rep.folds = per_fold;
    std::sort(rep.folds.begin(), rep.folds.end(), [](const auto& a, const auto& b) { return a.fold < b.fold; });

    std::vector<double> nmes, mses, maps, sens, pooled;
    for (const auto& f : rep.folds) {
        if (f.failed) {
            ++rep.failed_folds;
            continue;
        }
        nmes.push_back(f.landmarks.mean);
        mses.push_back(f.landmarks.mse);
        maps.push_back(f.map);
        sens.push_back(f.sensitivity);
        pooled.insert(pooled.end(), f.landmarks.per_image_nme.begin(), f.landmarks.per_image_nme.end());
    }
    if (nmes.empty()) throw Error(ErrorCode::EmptyInput, "no successful folds to aggregate");
    std::tie(rep.nme_mean, rep.nme_std) = mean_and_population_std(nmes);
    std::tie(rep.mse_mean, rep.mse_std) = mean_and_population_std(mses);
    rep.map = mean_and_population_std(maps).first;
    rep.sensitivity = mean_and_population_std(sens).first;
    rep.fr_at_0p1 = pooled.empty() ? 0.0 : failure_rate(pooled, 0.1);
    return rep;
}

nlohmann::json to_json(const NmeResult& r) {
    return {{"nme_mean", r.mean},          {"nme_std", r.std},     {"failure_rate", r.failure_rate},
            {"mse", r.mse},                {"per_image_nme", r.per_image_nme},
            {"per_image_mse", r.per_image_mse}};
}

nlohmann::json to_json(const FoldMetrics& f) {
    nlohmann::json j = {{"fold", f.fold}, {"failed", f.failed}};
    if (f.failed) {
        j["error"] = f.error;
        return j;
    }
    j["landmarks"] = to_json(f.landmarks);
    j["map"] = f.map;
    j["sensitivity"] = f.sensitivity;
    return j;
}

nlohmann::json to_json(const EvalReport& r) {
    nlohmann::json folds = nlohmann::json::array();
    for (const auto& f : r.folds) folds.push_back(to_json(f));
    return {{"nme_mean", r.nme_mean}, {"nme_std", r.nme_std},     {"fr_at_0p1", r.fr_at_0p1},
            {"mse_mean", r.mse_mean}, {"mse_std", r.mse_std},     {"map", r.map},
            {"sensitivity", r.sensitivity}, {"config", r.config}, {"failed_folds", r.failed_folds},
            {"folds", folds}};
}

}  // namespace post
