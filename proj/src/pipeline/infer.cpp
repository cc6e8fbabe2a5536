// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "post/pipeline/infer.hpp"

#include <chrono>
#include <cmath>

#include "post/error.hpp"

namespace post::pipeline {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

NetBoxPredictor::NetBoxPredictor(std::shared_ptr<const models::Detector> det)
    : det_(std::move(det)), hash_(det_->params().hash()) {}

std::vector<BoundingBox> NetBoxPredictor::detect(const Image& img, const std::string&, double conf_threshold) const {
    return det_->detect(img, conf_threshold);
}

double NetBoxPredictor::conf_threshold() const { return det_->config().conf_threshold; }
double NetBoxPredictor::eval_conf_threshold() const { return det_->config().eval_conf_threshold; }

NetLandmarkPredictor::NetLandmarkPredictor(std::shared_ptr<const models::LandmarkNet> net)
    : net_(std::move(net)), hash_(net_->params().hash()) {}

int NetLandmarkPredictor::input_size() const { return net_->config().input_size; }
double NetLandmarkPredictor::crop_margin() const { return net_->config().crop_margin; }
CodecConfig NetLandmarkPredictor::codec() const { return net_->config().codec(); }

LandmarkPrediction NetLandmarkPredictor::predict(const Image& original, const CropContext& ctx) const {
    const int in = input_size();
    const HeatmapStack hm = net_->predict(models::crop_planar(original, ctx.crop_from_original, in));
    LandmarkPrediction out;
    try {
        const DecodedLandmarks d = decode(hm, codec());
        out.crop_landmarks = d.landmarks;
        out.confidence = d.confidence;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::FlatHeatmap) throw Error(ErrorCode::DecodeFailure, e.detail());
        throw;
    }
    out.heatmaps = hm;
    return out;
}

LandmarkLocation locate_landmarks_in_box(const Image& img, const std::string& image_id, const BoundingBox& box,
                                         const LandmarkPredictor& landmarks) {
    LandmarkLocation loc;
    loc.box = box;
    const int in = landmarks.input_size();
    loc.crop_transform = build_crop_transform(box, landmarks.crop_margin(), {in, in}, img.size());
    LandmarkPrediction p = landmarks.predict(img, {image_id, loc.crop_transform, in});
    if (p.crop_landmarks.frame != Frame::crop) throw Error(ErrorCode::WrongFrame, "landmark predictor must return crop-frame points");
    loc.crop_landmarks = p.crop_landmarks;
    loc.landmarks = apply_transform(invert(loc.crop_transform), p.crop_landmarks);
    loc.confidence = p.confidence;
    loc.heatmaps = std::move(p.heatmaps);
    return loc;
}

LandmarkLocation locate_landmarks(const Image& img, const std::string& image_id, const BoxPredictor& detector,
                                  const LandmarkPredictor& landmarks) {
    const auto boxes = detector.detect(img, image_id, detector.conf_threshold());
    if (boxes.empty()) {
        throw Error(ErrorCode::NoDetection, "no glans detected above confidence " + std::to_string(detector.conf_threshold()));
    }
    LandmarkLocation loc = locate_landmarks_in_box(img, image_id, boxes.front(), landmarks);
    loc.detections = static_cast<int>(boxes.size());
    return loc;
}

InterpretationTable interpretation_table_from_json(const json& j) {
    InterpretationTable t;
    if (j.is_null()) return t;
    if (!j.is_array()) throw Error(ErrorCode::SchemaError, "interpretation table must be an array");
    for (const auto& e : j) {
        try {
            t.push_back({e.at("min_score").get<double>(), e.at("max_score").get<double>(), e.at("text").get<std::string>()});
        } catch (const json::exception& ex) {
            throw Error(ErrorCode::SchemaError, std::string("interpretation rule: ") + ex.what());
        }
    }
    return t;
}

std::optional<std::string> interpret(const InterpretationTable& table, double score) {
    for (const auto& r : table) {
        if (score >= r.min_score && score < r.max_score) return r.text;
    }
    return std::nullopt;
}

ScoreReport infer(const Image& img, const std::string& image_id, const BoxPredictor& detector,
                  const LandmarkPredictor& landmarks, const InterpretationTable& table) {
    const auto t0 = Clock::now();
    ScoreReport r;
    r.image_id = image_id;

    auto t = Clock::now();
    const auto boxes = detector.detect(img, image_id, detector.conf_threshold());
    r.timing.detect_ms = ms_since(t);
    if (boxes.empty()) {
        throw Error(ErrorCode::NoDetection, "no glans detected above confidence " + std::to_string(detector.conf_threshold()));
    }

    t = Clock::now();
    const LandmarkLocation loc = locate_landmarks_in_box(img, image_id, boxes.front(), landmarks);
    r.timing.landmarks_ms = ms_since(t);

    t = Clock::now();
    r.post = post_score(loc.landmarks);
    r.timing.score_ms = ms_since(t);

    r.box = loc.box;
    r.detections = static_cast<int>(boxes.size());
    r.crop_transform = loc.crop_transform;
    r.crop_landmarks = loc.crop_landmarks;
    r.landmarks = loc.landmarks;
    r.confidence = loc.confidence;
    r.model_hashes = {{"detector", detector.model_hash()}, {"landmarks", landmarks.model_hash()}};
    r.interpretation = interpret(table, r.post.score);
    r.timing.total_ms = ms_since(t0);
    return r;
}

PostResult recompute_score(const LandmarkSet& original_frame_landmarks) { return post_score(original_frame_landmarks); }

json to_json(const LandmarkSet& lm) {
    json j = json::object();
    for (std::size_t k = 0; k < kNumLandmarks; ++k) j[std::string(kLandmarkKeys[k])] = {lm.points[k].x, lm.points[k].y};
    return j;
}

LandmarkSet landmarks_from_json(const json& j, Frame frame) {
    if (!j.is_object()) throw Error(ErrorCode::SchemaError, "landmarks must be an object");
    LandmarkSet lm;
    lm.frame = frame;
    for (std::size_t k = 0; k < kNumLandmarks; ++k) {
        const std::string key(kLandmarkKeys[k]);
        if (!j.contains(key)) throw Error(ErrorCode::SchemaError, "landmark " + key + " missing");
        const json& p = j.at(key);
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
            throw Error(ErrorCode::SchemaError, "landmark " + key + " must be [x, y]");
        }
        lm.points[k] = {p[0].get<double>(), p[1].get<double>()};
        if (!std::isfinite(lm.points[k].x) || !std::isfinite(lm.points[k].y)) {
            throw Error(ErrorCode::SchemaError, "landmark " + key + " is not finite");
        }
    }
    if (j.size() != kNumLandmarks) throw Error(ErrorCode::SchemaError, "unexpected landmark keys");
    return lm;
}

json to_json(const BoundingBox& b) {
    return {{"x_min", b.x_min}, {"y_min", b.y_min}, {"x_max", b.x_max}, {"y_max", b.y_max}, {"confidence", b.confidence}};
}

json to_json(const PostResult& r) {
    return {{"ratio_left", r.ratio_left},
            {"ratio_right", r.ratio_right},
            {"score", r.score},
            {"glanular_diameter", r.glanular_diameter}};
}

json to_json(const ScoreReport& r) {
    json conf = json::object();
    for (std::size_t k = 0; k < kNumLandmarks; ++k) conf[std::string(kLandmarkKeys[k])] = r.confidence[k];
    return {{"image_id", r.image_id},
            {"box", to_json(r.box)},
            {"detections", r.detections},
            {"landmarks", to_json(r.landmarks)},
            {"confidence", conf},
            {"post", to_json(r.post)},
            {"crop",
             {{"scale", r.crop_transform.scale},
              {"offset_x", r.crop_transform.offset_x},
              {"offset_y", r.crop_transform.offset_y},
              {"landmarks", to_json(r.crop_landmarks)}}},
            {"models", r.model_hashes},
            {"interpretation", r.interpretation ? json(*r.interpretation) : json(nullptr)},
            {"timing_ms",
             {{"detect", r.timing.detect_ms},
              {"landmarks", r.timing.landmarks_ms},
              {"score", r.timing.score_ms},
              {"total", r.timing.total_ms}}}};
}

}  // namespace post::pipeline
