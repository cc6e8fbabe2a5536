// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "post/geometry.hpp"
#include "post/heatmap.hpp"
#include "post/image.hpp"
#include "post/models/detector.hpp"
#include "post/models/landmark_net.hpp"

namespace post::pipeline {

/// Glans localization stage. Implementations must be safe for concurrent calls.
class BoxPredictor {
public:
    virtual ~BoxPredictor() = default;
    /// Post-NMS boxes in the original frame, confidence descending.
    virtual std::vector<BoundingBox> detect(const Image& img, const std::string& image_id,
                                            double conf_threshold) const = 0;
    virtual double conf_threshold() const = 0;
    virtual double eval_conf_threshold() const { return 0.001; }
    virtual std::string model_hash() const = 0;
};

struct CropContext {
    std::string image_id;
    FrameTransform crop_from_original;
    int crop_size = 0;
};

struct LandmarkPrediction {
    LandmarkSet crop_landmarks;  ///< crop frame
    std::array<double, kNumLandmarks> confidence{};
    std::optional<HeatmapStack> heatmaps;
};

/// Landmark stage. Implementations must be safe for concurrent calls.
class LandmarkPredictor {
public:
    virtual ~LandmarkPredictor() = default;
    virtual int input_size() const = 0;
    virtual double crop_margin() const = 0;
    virtual CodecConfig codec() const = 0;
    virtual LandmarkPrediction predict(const Image& original, const CropContext& ctx) const = 0;
    virtual std::string model_hash() const = 0;
};

class NetBoxPredictor final : public BoxPredictor {
public:
    explicit NetBoxPredictor(std::shared_ptr<const models::Detector> det);
    std::vector<BoundingBox> detect(const Image& img, const std::string& image_id,
                                    double conf_threshold) const override;
    double conf_threshold() const override;
    double eval_conf_threshold() const override;
    std::string model_hash() const override { return hash_; }

private:
    std::shared_ptr<const models::Detector> det_;
    std::string hash_;
};

class NetLandmarkPredictor final : public LandmarkPredictor {
public:
    explicit NetLandmarkPredictor(std::shared_ptr<const models::LandmarkNet> net);
    int input_size() const override;
    double crop_margin() const override;
    CodecConfig codec() const override;
    LandmarkPrediction predict(const Image& original, const CropContext& ctx) const override;
    std::string model_hash() const override { return hash_; }

private:
    std::shared_ptr<const models::LandmarkNet> net_;
    std::string hash_;
};

/// Result of detect -> pick top box -> crop -> landmarks -> map back.
struct LandmarkLocation {
    BoundingBox box;
    int detections = 0;  ///< boxes surviving NMS
    FrameTransform crop_transform;
    LandmarkSet crop_landmarks;
    LandmarkSet landmarks;  ///< original frame
    std::array<double, kNumLandmarks> confidence{};
    std::optional<HeatmapStack> heatmaps;
};

/// Throws NoDetection when nothing clears the detector's threshold.
LandmarkLocation locate_landmarks(const Image& img, const std::string& image_id, const BoxPredictor& detector,
                                  const LandmarkPredictor& landmarks);
/// Same, with a caller-chosen box (evaluation fallbacks, tests).
LandmarkLocation locate_landmarks_in_box(const Image& img, const std::string& image_id, const BoundingBox& box,
                                         const LandmarkPredictor& landmarks);

/// Score ranges mapped to display text; empty by default.
struct InterpretationRule {
    double min_score = 0.0;  ///< inclusive
    double max_score = 0.0;  ///< exclusive
    std::string text;
};
using InterpretationTable = std::vector<InterpretationRule>;
InterpretationTable interpretation_table_from_json(const nlohmann::json& j);
std::optional<std::string> interpret(const InterpretationTable& table, double score);

struct StageTiming {
    double detect_ms = 0.0;
    double landmarks_ms = 0.0;
    double score_ms = 0.0;
    double total_ms = 0.0;
};

struct ScoreReport {
    std::string image_id;
    BoundingBox box;
    int detections = 0;
    FrameTransform crop_transform;
    LandmarkSet crop_landmarks;
    LandmarkSet landmarks;
    std::array<double, kNumLandmarks> confidence{};
    PostResult post;
    std::map<std::string, std::string> model_hashes;
    std::optional<std::string> interpretation;
    StageTiming timing;
};

ScoreReport infer(const Image& img, const std::string& image_id, const BoxPredictor& detector,
                  const LandmarkPredictor& landmarks, const InterpretationTable& table = {});

/// Delegates to post_score; exists so the service and the CLI share one entry point.
PostResult recompute_score(const LandmarkSet& original_frame_landmarks);

nlohmann::json to_json(const LandmarkSet& lm);
/// Expects keys A, B, Bp, C, Cp with [x, y] finite numbers (SchemaError otherwise).
LandmarkSet landmarks_from_json(const nlohmann::json& j, Frame frame = Frame::original);
nlohmann::json to_json(const BoundingBox& b);
nlohmann::json to_json(const PostResult& r);
nlohmann::json to_json(const ScoreReport& r);

}  // namespace post::pipeline
