// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "post/geometry.hpp"

namespace post {

double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

struct DetectionRecord {
    std::string image_id;
    std::vector<BoundingBox> predictions;
    std::vector<BoundingBox> ground_truth;
};

/// Area under the precision/recall step function (all-points interpolation).
/// Predictions are ranked by descending confidence and greedily matched to the
/// highest-IoU unmatched ground truth with IoU >= iou_threshold. Equal
/// confidences form one operating point. Throws EmptyGroundTruth.
double average_precision(const std::vector<DetectionRecord>& records, double iou_threshold = 0.5);

/// Mean of per-class APs. Throws EmptyInput.
double mean_average_precision(const std::vector<double>& aps);

/// TP / (TP + FN) over ground truths, counting only predictions with
/// confidence >= confidence_threshold. Throws EmptyGroundTruth.
double sensitivity(const std::vector<DetectionRecord>& records, double iou_threshold = 0.5,
                   double confidence_threshold = 0.25);

/// Mean over the five landmarks of |pred - gt| / |C - C'|_gt.
/// Throws DegenerateNormalizer if the ground-truth diameter is below epsilon.
double nme(const LandmarkSet& pred, const LandmarkSet& gt, double epsilon = kDefaultDegeneracyEpsilon);

/// nme() over aligned batches, evaluated on flattened coordinate arrays with a
/// SIMD/OpenMP loop. Same errors as nme(); ShapeMismatch when sizes differ.
std::vector<double> nme_batch(const std::vector<LandmarkSet>& pred, const std::vector<LandmarkSet>& gt,
                              double epsilon = kDefaultDegeneracyEpsilon);

/// Fraction of entries strictly above threshold. Throws EmptyInput.
double failure_rate(const std::vector<double>& nmes, double threshold = 0.1);

struct NmeResult {
    std::vector<double> per_image_nme;
    std::vector<double> per_image_mse;
    double mean = 0.0;
    double std = 0.0;  ///< population std across images
    double failure_rate = 0.0;
    double mse = 0.0;
};

NmeResult summarize_nme(std::vector<double> per_image_nme, std::vector<double> per_image_mse,
                        double fr_threshold = 0.1);

struct FoldMetrics {
    int fold = 0;
    bool failed = false;
    std::string error;
    NmeResult landmarks;
    double map = 0.0;
    double sensitivity = 0.0;
};

/// Aggregate over folds. NME and MSE statistics are the mean and population
/// std of the per-fold means; the failure rate pools every image of every fold.
struct EvalReport {
    std::vector<FoldMetrics> folds;
    double nme_mean = 0.0;
    double nme_std = 0.0;
    double fr_at_0p1 = 0.0;
    double mse_mean = 0.0;
    double mse_std = 0.0;
    double map = 0.0;
    double sensitivity = 0.0;
    int failed_folds = 0;
    nlohmann::json config = nlohmann::json::object();
};

/// Failed folds are carried but excluded from the statistics.
/// Throws EmptyInput if no fold succeeded.
EvalReport aggregate_folds(const std::vector<FoldMetrics>& per_fold);

nlohmann::json to_json(const NmeResult& r);
nlohmann::json to_json(const FoldMetrics& f);
/// Fixed top-level keys: nme_mean, nme_std, fr_at_0p1, mse_mean, mse_std, map, sensitivity, config.
nlohmann::json to_json(const EvalReport& r);

}  // namespace post
