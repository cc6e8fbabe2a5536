// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "post/dataset.hpp"
#include "post/heatmap.hpp"

namespace post::models {

struct SgdOptions {
    double learning_rate = 1e-2;
    double momentum = 0.937;
    double weight_decay = 5e-4;
};

struct AdamOptions {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.99;
};

struct LrDrop {
    int epoch = 0;  ///< zero-based epoch from which the rate applies
    double learning_rate = 0.0;
};

struct DetectorConfig {
    int grid_size = 8;
    int input_size = 128;
    double conf_threshold = 0.25;
    double nms_iou_threshold = 0.45;
    /// Threshold used when collecting candidates for AP (the PR curve needs low-confidence boxes).
    double eval_conf_threshold = 0.001;
    int epochs = 250;
    SgdOptions optimizer;
    int warmup_epochs = 3;  ///< linear warmup, then linear decay to 1% at the last epoch
    int batch_size = 16;
    int early_stop_patience = 15;
    std::optional<std::string> pretrained_init;
    /// Backbone widths, one stride-2 level each; grid_size must equal input_size / 2^(levels-1).
    std::vector<int> widths{16, 32, 64, 128, 128};
    int neck_width = 64;
    double box_loss_weight = 5.0;
    AugmentRanges augment;
    std::uint64_t seed = 0;

    int stride() const noexcept { return input_size / grid_size; }
    void validate() const;
};

struct LandmarkNetConfig {
    int stages = 4;
    std::vector<int> stream_widths{18, 36, 72, 144};
    std::string fusion = "sum";
    std::string head = "hrnetv2";
    int heatmap_size = 64;
    int input_size = 256;
    double sigma = 1.5;
    int epochs = 100;
    AdamOptions optimizer;
    int batch_size = 16;
    int early_stop_patience = 15;
    std::vector<LrDrop> lr_drops{{50, 1e-5}, {70, 1e-6}};
    std::optional<std::string> pretrained_init;
    int stem_width = 32;
    int blocks_per_stream = 2;
    double crop_margin = 0.10;
    AugmentRanges augment;
    std::uint64_t seed = 0;

    CodecConfig codec() const;
    void validate() const;
};

nlohmann::json to_json(const DetectorConfig& c);
nlohmann::json to_json(const LandmarkNetConfig& c);
/// Missing keys keep their defaults; unknown keys are a SchemaError.
DetectorConfig detector_config_from_json(const nlohmann::json& j);
LandmarkNetConfig landmark_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const AugmentRanges& a);
AugmentRanges augment_ranges_from_json(const nlohmann::json& j);

/// Reads a config file; `model_kind` in the file (if present) must match.
nlohmann::json load_config_json(const std::string& path);

}  // namespace post::models
