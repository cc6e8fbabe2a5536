// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "post/dataset.hpp"
#include "post/models/detector.hpp"
#include "post/models/landmark_net.hpp"
#include "post/models/training.hpp"

namespace post::models {

/// Weights plus everything needed to rebuild and audit them.
struct TrainedModel {
    std::string model_kind;  ///< "detector" | "landmarks"
    nlohmann::json config;
    std::uint64_t seed = 0;
    std::string data_hash;
    double val_loss = 0.0;
    std::string created_at;
    std::vector<EpochRecord> history;
    std::vector<std::uint8_t> weights;

    std::string weights_hash() const;
    /// {model_kind, config, seed, data_hash, val_loss, created_at, history, weights_hash}
    nlohmann::json sidecar() const;
};

/// The sidecar lives next to the weights as "<weights>.json".
std::filesystem::path sidecar_path(const std::filesystem::path& weights);
void save_model(const TrainedModel& m, const std::filesystem::path& weights);
TrainedModel load_model(const std::filesystem::path& weights);

std::unique_ptr<Detector> make_detector(const TrainedModel& m);
std::unique_ptr<LandmarkNet> make_landmark_net(const TrainedModel& m);

struct TrainData {
    std::vector<const Sample*> train;
    std::vector<const Sample*> val;
};

struct TrainOptions {
    std::ostream* jsonl = nullptr;
    std::function<void(const EpochRecord&)> on_epoch;
};

TrainedModel train_detector(const DetectorConfig& cfg, const TrainData& data, const TrainOptions& opts = {});
TrainedModel train_landmarks(const LandmarkNetConfig& cfg, const TrainData& data, const TrainOptions& opts = {});

/// One landmark-net training example: the GT-box crop (with margin), optionally
/// augmented about the crop center, as a normalized planar image and its heatmap
/// target. Returns false when the augmented landmarks leave the crop.
struct LandmarkExample {
    std::vector<float> planar;
    HeatmapStack target;
    LandmarkSet crop_landmarks;
};
bool make_landmark_example(const Sample& s, const LandmarkNetConfig& cfg, const AugmentSpec* spec,
                           LandmarkExample& out);

/// One detector training example: letterboxed (optionally augmented) image and
/// the target box in the network-input frame. Returns false on LandmarkOutOfFrame.
struct DetectorExample {
    std::vector<float> planar;
    BoundingBox target;
};
bool make_detector_example(const Sample& s, const DetectorConfig& cfg, const AugmentSpec* spec,
                           DetectorExample& out);

/// Optimization sanity check: `steps` Adam updates on one unaugmented sample.
/// Returns the training MSE before each update; the net keeps the final weights.
std::vector<double> overfit_single(LandmarkNet& net, const Sample& s, int steps, double learning_rate);

/// Current UTC time as ISO-8601.
std::string utc_timestamp();

}  // namespace post::models
