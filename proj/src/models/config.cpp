// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "post/models/config.hpp"

#include <fstream>
#include <set>

#include "post/error.hpp"

namespace post::models {

using nlohmann::json;

namespace {

// Reads known keys from an object and rejects anything else.
class Fields {
public:
    Fields(const json& j, std::string what) : j_(j), what_(std::move(what)) {
        if (!j.is_object()) throw Error(ErrorCode::SchemaError, what_ + " must be a JSON object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw Error(ErrorCode::SchemaError, what_ + "." + key + ": " + e.what());
        }
    }

    const json* sub(const char* key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (!seen_.count(k)) throw Error(ErrorCode::SchemaError, what_ + ": unknown key '" + k + "'");
        }
    }

private:
    const json& j_;
    std::string what_;
    std::set<std::string> seen_;
};

void optional_path(Fields& f, const char* key, std::optional<std::string>& out) {
    if (const json* v = f.sub(key)) {
        if (v->is_null()) out.reset();
        else if (v->is_string()) out = v->get<std::string>();
        else throw Error(ErrorCode::SchemaError, std::string(key) + " must be a string or null");
    }
}

json optional_path_json(const std::optional<std::string>& p) { return p ? json(*p) : json(nullptr); }

void check(bool ok, const std::string& msg) {
    if (!ok) throw Error(ErrorCode::ConfigMismatch, msg);
}

void check_kind(Fields& f, const char* expected) {
    std::string kind = expected;
    f.get("model_kind", kind);
    if (kind != expected) {
        throw Error(ErrorCode::ConfigMismatch, std::string("config is for '") + kind + "', expected '" + expected + "'");
    }
}

}  // namespace

json to_json(const AugmentRanges& a) {
    return {{"max_translate_frac", a.max_translate_frac},
            {"max_rotate_deg", a.max_rotate_deg},
            {"min_scale", a.min_scale},
            {"max_scale", a.max_scale},
            {"flip_probability", a.flip_probability}};
}

AugmentRanges augment_ranges_from_json(const json& j) {
    AugmentRanges a;
    Fields f(j, "augment");
    f.get("max_translate_frac", a.max_translate_frac);
    f.get("max_rotate_deg", a.max_rotate_deg);
    f.get("min_scale", a.min_scale);
    f.get("max_scale", a.max_scale);
    f.get("flip_probability", a.flip_probability);
    f.finish();
    return a;
}

void DetectorConfig::validate() const {
    check(conf_threshold > 0 && conf_threshold < 1, "conf_threshold must be in (0,1)");
    check(nms_iou_threshold > 0 && nms_iou_threshold < 1, "nms_iou_threshold must be in (0,1)");
    check(eval_conf_threshold > 0 && eval_conf_threshold < 1, "eval_conf_threshold must be in (0,1)");
    check(epochs > 0 && batch_size > 0, "epochs and batch_size must be positive");
    check(optimizer.learning_rate > 0 && optimizer.momentum >= 0 && optimizer.weight_decay >= 0,
          "optimizer hyperparameters must be positive");
    check(!widths.empty(), "widths must not be empty");
    for (int w : widths) check(w > 0, "widths must be positive");
    check(neck_width > 0, "neck_width must be positive");
    const int levels = static_cast<int>(widths.size());
    check(grid_size > 0 && input_size == grid_size * (1 << (levels - 1)),
          "input_size must equal grid_size * 2^(levels-1) (" + std::to_string(input_size) + " vs grid " +
              std::to_string(grid_size) + ", " + std::to_string(levels) + " levels)");
    check(levels >= 2, "detector needs at least two backbone levels");
}

void LandmarkNetConfig::validate() const {
    check(stages >= 1 && stages == static_cast<int>(stream_widths.size()), "stages must equal len(stream_widths)");
    for (std::size_t i = 0; i < stream_widths.size(); ++i) {
        check(stream_widths[i] > 0, "stream widths must be positive");
        if (i > 0) check(stream_widths[i] > stream_widths[i - 1], "stream widths must be strictly increasing");
    }
    check(fusion == "sum", "only sum fusion is implemented");
    check(head == "hrnetv2", "only the hrnetv2 head is implemented");
    check(input_size == 4 * heatmap_size, "input_size must be 4 * heatmap_size");
    check(heatmap_size % (1 << (stages - 1)) == 0, "heatmap_size must be divisible by 2^(stages-1)");
    check(sigma > 0, "sigma must be positive");
    check(epochs > 0 && batch_size > 0 && stem_width > 0 && blocks_per_stream >= 0, "sizes must be positive");
    check(crop_margin >= 0, "crop_margin must be non-negative");
    check(optimizer.learning_rate > 0 && optimizer.beta1 >= 0 && optimizer.beta1 < 1 && optimizer.beta2 >= 0 &&
              optimizer.beta2 < 1,
          "invalid Adam hyperparameters");
    codec().validate();
}

CodecConfig LandmarkNetConfig::codec() const {
    CodecConfig c;
    c.sigma_x = c.sigma_y = sigma;
    c.heatmap_size = heatmap_size;
    c.input_size = input_size;
    return c;
}

json to_json(const DetectorConfig& c) {
    return {{"model_kind", "detector"},
            {"grid_size", c.grid_size},
            {"input_size", c.input_size},
            {"conf_threshold", c.conf_threshold},
            {"nms_iou_threshold", c.nms_iou_threshold},
            {"eval_conf_threshold", c.eval_conf_threshold},
            {"epochs", c.epochs},
            {"optimizer",
             {{"name", "sgd"},
              {"learning_rate", c.optimizer.learning_rate},
              {"momentum", c.optimizer.momentum},
              {"weight_decay", c.optimizer.weight_decay}}},
            {"warmup_epochs", c.warmup_epochs},
            {"batch_size", c.batch_size},
            {"early_stop_patience", c.early_stop_patience},
            {"pretrained_init", optional_path_json(c.pretrained_init)},
            {"widths", c.widths},
            {"neck_width", c.neck_width},
            {"box_loss_weight", c.box_loss_weight},
            {"augment", to_json(c.augment)},
            {"seed", c.seed}};
}

json to_json(const LandmarkNetConfig& c) {
    json drops = json::array();
    for (const auto& d : c.lr_drops) drops.push_back({{"epoch", d.epoch}, {"learning_rate", d.learning_rate}});
    return {{"model_kind", "landmarks"},
            {"stages", c.stages},
            {"stream_widths", c.stream_widths},
            {"fusion", c.fusion},
            {"head", c.head},
            {"heatmap_size", c.heatmap_size},
            {"input_size", c.input_size},
            {"sigma", c.sigma},
            {"epochs", c.epochs},
            {"optimizer",
             {{"name", "adam"},
              {"learning_rate", c.optimizer.learning_rate},
              {"beta1", c.optimizer.beta1},
              {"beta2", c.optimizer.beta2}}},
            {"batch_size", c.batch_size},
            {"early_stop_patience", c.early_stop_patience},
            {"lr_drops", drops},
            {"pretrained_init", optional_path_json(c.pretrained_init)},
            {"stem_width", c.stem_width},
            {"blocks_per_stream", c.blocks_per_stream},
            {"crop_margin", c.crop_margin},
            {"augment", to_json(c.augment)},
            {"seed", c.seed}};
}

DetectorConfig detector_config_from_json(const json& j) {
    DetectorConfig c;
    Fields f(j, "detector config");
    check_kind(f, "detector");
    f.get("grid_size", c.grid_size);
    f.get("input_size", c.input_size);
    f.get("conf_threshold", c.conf_threshold);
    f.get("nms_iou_threshold", c.nms_iou_threshold);
    f.get("eval_conf_threshold", c.eval_conf_threshold);
    f.get("epochs", c.epochs);
    if (const json* o = f.sub("optimizer")) {
        Fields of(*o, "optimizer");
        std::string name = "sgd";
        of.get("name", name);
        if (name != "sgd") throw Error(ErrorCode::ConfigMismatch, "detector optimizer must be sgd");
        of.get("learning_rate", c.optimizer.learning_rate);
        of.get("momentum", c.optimizer.momentum);
        of.get("weight_decay", c.optimizer.weight_decay);
        of.finish();
    }
    f.get("warmup_epochs", c.warmup_epochs);
    f.get("batch_size", c.batch_size);
    f.get("early_stop_patience", c.early_stop_patience);
    optional_path(f, "pretrained_init", c.pretrained_init);
    f.get("widths", c.widths);
    f.get("neck_width", c.neck_width);
    f.get("box_loss_weight", c.box_loss_weight);
    if (const json* a = f.sub("augment")) c.augment = augment_ranges_from_json(*a);
    f.get("seed", c.seed);
    f.finish();
    c.validate();
    return c;
}

LandmarkNetConfig landmark_config_from_json(const json& j) {
    LandmarkNetConfig c;
    Fields f(j, "landmark config");
    check_kind(f, "landmarks");
    f.get("stages", c.stages);
    f.get("stream_widths", c.stream_widths);
    f.get("fusion", c.fusion);
    f.get("head", c.head);
    f.get("heatmap_size", c.heatmap_size);
    f.get("input_size", c.input_size);
    f.get("sigma", c.sigma);
    f.get("epochs", c.epochs);
    if (const json* o = f.sub("optimizer")) {
        Fields of(*o, "optimizer");
        std::string name = "adam";
        of.get("name", name);
        if (name != "adam") throw Error(ErrorCode::ConfigMismatch, "landmark optimizer must be adam");
        of.get("learning_rate", c.optimizer.learning_rate);
        of.get("beta1", c.optimizer.beta1);
        of.get("beta2", c.optimizer.beta2);
        of.finish();
    }
    f.get("batch_size", c.batch_size);
    f.get("early_stop_patience", c.early_stop_patience);
    if (const json* d = f.sub("lr_drops")) {
        if (!d->is_array()) throw Error(ErrorCode::SchemaError, "lr_drops must be an array");
        c.lr_drops.clear();
        for (const auto& e : *d) {
            Fields df(e, "lr_drops[]");
            LrDrop drop;
            df.get("epoch", drop.epoch);
            df.get("learning_rate", drop.learning_rate);
            df.finish();
            c.lr_drops.push_back(drop);
        }
    }
    optional_path(f, "pretrained_init", c.pretrained_init);
    f.get("stem_width", c.stem_width);
    f.get("blocks_per_stream", c.blocks_per_stream);
    f.get("crop_margin", c.crop_margin);
    if (const json* a = f.sub("augment")) c.augment = augment_ranges_from_json(*a);
    f.get("seed", c.seed);
    f.finish();
    c.validate();
    return c;
}

json load_config_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, path + ": " + e.what());
    }
}

}  // namespace post::models
