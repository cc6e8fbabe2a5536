// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "post/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "post/error.hpp"
#include "post/hash.hpp"

namespace post {

namespace {

using nlohmann::json;

std::string point_str(Point2 p) {
    std::ostringstream os;
    os << "(" << p.x << ", " << p.y << ")";
    return os.str();
}

const json& field(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::SchemaError, where + ": missing field '" + key + "'");
    return j.at(key);
}

double number(const json& j, const char* key, const std::string& where) {
    const json& v = field(j, key, where);
    if (!v.is_number()) throw Error(ErrorCode::SchemaError, where + ": field '" + key + "' must be a number");
    return v.get<double>();
}

std::string string_field(const json& j, const char* key, const std::string& where) {
    const json& v = field(j, key, where);
    if (!v.is_string()) throw Error(ErrorCode::SchemaError, where + ": field '" + key + "' must be a string");
    return v.get<std::string>();
}

int integer(const json& j, const char* key, const std::string& where) {
    const json& v = field(j, key, where);
    if (!v.is_number_integer()) throw Error(ErrorCode::SchemaError, where + ": field '" + key + "' must be an integer");
    return v.get<int>();
}

}  // namespace

void validate_record(const ImageRecord& r) {
    const std::string where = "record '" + r.image_id + "'";
    if (r.width <= 0 || r.height <= 0) throw Error(ErrorCode::SchemaError, where + ": image size must be positive");
    if (r.landmarks.frame != Frame::original) throw Error(ErrorCode::WrongFrame, where + ": landmarks not in original frame");
    try {
        validate(r.gt_box);
    } catch (const Error& e) {
        throw Error(ErrorCode::SchemaError, where + ": " + e.detail());
    }
    for (std::size_t k = 0; k < kNumLandmarks; ++k) {
        const Point2 p = r.landmarks.points[k];
        if (!(p.x >= 0.0 && p.x <= r.width && p.y >= 0.0 && p.y <= r.height)) {
            throw Error(ErrorCode::BoundsError, where + ": landmark " + std::string(kLandmarkKeys[k]) + " " +
                                                    point_str(p) + " outside the " + std::to_string(r.width) + "x" +
                                                    std::to_string(r.height) + " image");
        }
        if (!r.gt_box.contains(p)) {
            throw Error(ErrorCode::BoundsError,
                        where + ": landmark " + std::string(kLandmarkKeys[k]) + " outside the bounding box");
        }
    }
}

json to_json(const ImageRecord& r) {
    json lm = json::object();
    for (std::size_t k = 0; k < kNumLandmarks; ++k) {
        lm[std::string(kLandmarkKeys[k])] = {r.landmarks.points[k].x, r.landmarks.points[k].y};
    }
    return {{"image_id", r.image_id},
            {"path", r.path},
            {"width", r.width},
            {"height", r.height},
            {"bbox", {{"x_min", r.gt_box.x_min}, {"y_min", r.gt_box.y_min}, {"x_max", r.gt_box.x_max}, {"y_max", r.gt_box.y_max}}},
            {"landmarks", lm},
            {"qc",
             {{"status", r.qc.status == QcStatus::accepted ? "accepted" : "rejected"},
              {"reason", r.qc.reason ? json(*r.qc.reason) : json(nullptr)}}},
            {"source", r.source == Source::clinical ? "clinical" : "synthetic"}};
}

ImageRecord record_from_json(const json& j) {
    ImageRecord r;
    r.image_id = string_field(j, "image_id", "record");
    const std::string where = "record '" + r.image_id + "'";
    r.path = string_field(j, "path", where);
    r.width = integer(j, "width", where);
    r.height = integer(j, "height", where);

    const json& box = field(j, "bbox", where);
    r.gt_box = {number(box, "x_min", where + ".bbox"), number(box, "y_min", where + ".bbox"),
                number(box, "x_max", where + ".bbox"), number(box, "y_max", where + ".bbox"), 1.0};

    const json& lm = field(j, "landmarks", where);
    for (std::size_t k = 0; k < kNumLandmarks; ++k) {
        const std::string key(kLandmarkKeys[k]);
        const json& p = field(lm, key.c_str(), where + ".landmarks");
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
            throw Error(ErrorCode::SchemaError, where + ": landmark '" + key + "' must be [x, y]");
        }
        r.landmarks.points[k] = {p[0].get<double>(), p[1].get<double>()};
    }
    r.landmarks.frame = Frame::original;

    const json& qc = field(j, "qc", where);
    const std::string status = string_field(qc, "status", where + ".qc");
    if (status == "accepted") {
        r.qc.status = QcStatus::accepted;
    } else if (status == "rejected") {
        r.qc.status = QcStatus::rejected;
    } else {
        throw Error(ErrorCode::SchemaError, where + ": qc.status must be 'accepted' or 'rejected'");
    }
    const json& reason = field(qc, "reason", where + ".qc");
    if (reason.is_string()) {
        r.qc.reason = reason.get<std::string>();
    } else if (!reason.is_null()) {
        throw Error(ErrorCode::SchemaError, where + ": qc.reason must be a string or null");
    }

    const std::string source = string_field(j, "source", where);
    if (source == "clinical") {
        r.source = Source::clinical;
    } else if (source == "synthetic") {
        r.source = Source::synthetic;
    } else {
        throw Error(ErrorCode::SchemaError, where + ": source must be 'clinical' or 'synthetic'");
    }
    validate_record(r);
    return r;
}

std::vector<ImageRecord> parse_manifest(std::istream& in) {
    std::vector<ImageRecord> records;
    std::set<std::string> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::SchemaError, "line " + std::to_string(line_no) + ": " + e.what());
        }
        ImageRecord r = record_from_json(j);
        if (!seen.insert(r.image_id).second) {
            throw Error(ErrorCode::DuplicateId, "image_id '" + r.image_id + "' repeated on line " + std::to_string(line_no));
        }
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<ImageRecord> load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open manifest " + path.string());
    return parse_manifest(in);
}

void save_manifest(const std::vector<ImageRecord>& records, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write manifest " + path.string());
    for (const auto& r : records) out << to_json(r).dump() << '\n';
}

std::filesystem::path resolve_image_path(const std::filesystem::path& manifest_path, const ImageRecord& r) {
    const std::filesystem::path p(r.path);
    return p.is_absolute() ? p : manifest_path.parent_path() / p;
}

std::string data_hash(const std::vector<ImageRecord>& records) {
    Fnv1a h;
    for (const auto& r : records) h.update(to_json(r).dump());
    return h.hex();
}

void AugmentSpec::validate() const {
    if (!(rotate_deg >= -30.0 && rotate_deg <= 30.0)) throw Error(ErrorCode::InvalidArgument, "rotation outside [-30, 30] degrees");
    if (!(scale >= 0.75 && scale <= 1.25)) throw Error(ErrorCode::InvalidArgument, "scale outside [0.75, 1.25]");
    if (!(std::abs(translate_x_frac) <= 1.0 && std::abs(translate_y_frac) <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "translation fraction magnitude above 1");
    }
}

AugmentSpec draw_augment(const AugmentRanges& ranges, Rng& rng) {
    AugmentSpec s;
    s.translate_x_frac = rng.uniform(-ranges.max_translate_frac, ranges.max_translate_frac);
    s.translate_y_frac = rng.uniform(-ranges.max_translate_frac, ranges.max_translate_frac);
    s.rotate_deg = rng.uniform(-ranges.max_rotate_deg, ranges.max_rotate_deg);
    s.scale = rng.uniform(ranges.min_scale, ranges.max_scale);
    s.hflip = rng.bernoulli(ranges.flip_probability);
    return s;
}

Affine2 augmentation_affine(const AugmentSpec& spec, ImageSize frame) {
    spec.validate();
    const double cx = frame.width / 2.0, cy = frame.height / 2.0;
    Affine2 t = Affine2::translation(cx + spec.translate_x_frac * frame.width, cy + spec.translate_y_frac * frame.height) *
                Affine2::rotation_deg(spec.rotate_deg) * Affine2::scaling(spec.scale) * Affine2::translation(-cx, -cy);
    if (spec.hflip) t = Affine2::hflip(frame.width) * t;
    return t;
}

BoundingBox transform_box(const BoundingBox& box, const Affine2& t) {
    const Point2 c = t.apply(box.center());
    const double hx = box.width() / 2, hy = box.height() / 2;
    const double ex = std::hypot(t.a * hx, t.b * hy);
    const double ey = std::hypot(t.c * hx, t.d * hy);
    return {c.x - ex, c.y - ey, c.x + ex, c.y + ey, box.confidence};
}

LandmarkSet transform_landmarks(const LandmarkSet& lm, const Affine2& t) {
    LandmarkSet out = lm;
    for (auto& p : out.points) p = t.apply(p);
    return t.determinant() < 0 ? swap_sides(out) : out;
}

ImageRecord augment_record(const ImageRecord& r, const AugmentSpec& spec) {
    const ImageSize frame{r.width, r.height};
    const Affine2 t = augmentation_affine(spec, frame);

    ImageRecord out = r;
    out.landmarks = transform_landmarks(r.landmarks, t);
    for (std::size_t k = 0; k < kNumLandmarks; ++k) {
        const Point2 p = out.landmarks.points[k];
        if (!(p.x >= 0.0 && p.x < frame.width && p.y >= 0.0 && p.y < frame.height)) {
            throw Error(ErrorCode::LandmarkOutOfFrame,
                        "landmark " + std::string(kLandmarkKeys[k]) + " of '" + r.image_id + "' leaves the frame");
        }
    }
    BoundingBox box = transform_box(r.gt_box, t);
    for (const auto& p : out.landmarks.points) {
        box.x_min = std::min(box.x_min, p.x);
        box.y_min = std::min(box.y_min, p.y);
        box.x_max = std::max(box.x_max, p.x);
        box.y_max = std::max(box.y_max, p.y);
    }
    box.x_min = std::max(box.x_min, 0.0);
    box.y_min = std::max(box.y_min, 0.0);
    box.x_max = std::min(box.x_max, static_cast<double>(frame.width));
    box.y_max = std::min(box.y_max, static_cast<double>(frame.height));
    out.gt_box = box;
    return out;
}

Sample augment(const Sample& s, const AugmentSpec& spec) {
    if (s.image.width != s.record.width || s.image.height != s.record.height) {
        throw Error(ErrorCode::InvalidArgument, "image size does not match record '" + s.record.image_id + "'");
    }
    Sample out;
    out.record = augment_record(s.record, spec);
    out.image = warp_affine(s.image, augmentation_affine(spec, s.image.size()), s.image.width, s.image.height);
    return out;
}

std::vector<std::string> FoldPlan::test_ids(int fold) const {
    std::vector<std::string> ids;
    for (const auto& [id, f] : assignments) {
        if (f == fold) ids.push_back(id);
    }
    return ids;
}

std::vector<std::string> FoldPlan::val_ids(int fold) const {
    if (fold < 0 || fold >= static_cast<int>(validation.size())) throw Error(ErrorCode::InvalidArgument, "fold out of range");
    return validation[fold];
}

std::vector<std::string> FoldPlan::train_ids(int fold) const {
    const auto val = val_ids(fold);
    const std::set<std::string> held(val.begin(), val.end());
    std::vector<std::string> ids;
    for (const auto& [id, f] : assignments) {
        if (f != fold && !held.count(id)) ids.push_back(id);
    }
    return ids;
}

FoldPlan plan_folds(const std::vector<ImageRecord>& records, int k, double val_frac, std::uint64_t seed) {
    if (k < 2) throw Error(ErrorCode::InvalidArgument, "k must be at least 2");
    if (!(val_frac >= 0.0 && val_frac < 1.0)) throw Error(ErrorCode::InvalidArgument, "val_frac must lie in [0,1)");
    std::vector<std::string> ids;
    for (const auto& r : records) {
        if (r.accepted()) ids.push_back(r.image_id);
    }
    if (static_cast<int>(ids.size()) < k) {
        throw Error(ErrorCode::TooFewRecords, std::to_string(ids.size()) + " accepted records for " + std::to_string(k) + " folds");
    }
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw Error(ErrorCode::DuplicateId, "duplicate image_id in records");

    FoldPlan plan;
    plan.seed = seed;
    plan.k = k;
    plan.val_frac = val_frac;
    Rng rng(seed);
    rng.shuffle(ids.begin(), ids.end());
    for (std::size_t i = 0; i < ids.size(); ++i) plan.assignments[ids[i]] = static_cast<int>(i % k);

    plan.validation.resize(k);
    for (int f = 0; f < k; ++f) {
        std::vector<std::string> pool;
        for (const auto& [id, fold] : plan.assignments) {
            if (fold != f) pool.push_back(id);
        }
        Rng fold_rng = Rng::derive(seed, static_cast<std::uint64_t>(f) + 1);
        fold_rng.shuffle(pool.begin(), pool.end());
        pool.resize(static_cast<std::size_t>(std::lround(val_frac * static_cast<double>(pool.size()))));
        std::sort(pool.begin(), pool.end());
        plan.validation[f] = std::move(pool);
    }
    return plan;
}

json to_json(const FoldPlan& plan) {
    return {{"seed", plan.seed}, {"k", plan.k}, {"val_frac", plan.val_frac}, {"assignments", plan.assignments},
            {"validation", plan.validation}};
}

FoldPlan fold_plan_from_json(const json& j) {
    FoldPlan plan;
    try {
        plan.seed = j.at("seed").get<std::uint64_t>();
        plan.k = j.at("k").get<int>();
        plan.val_frac = j.value("val_frac", 0.2);
        plan.assignments = j.at("assignments").get<std::map<std::string, int>>();
        plan.validation = j.at("validation").get<std::vector<std::vector<std::string>>>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("fold plan: ") + e.what());
    }
    if (static_cast<int>(plan.validation.size()) != plan.k) throw Error(ErrorCode::SchemaError, "fold plan: validation lists != k");
    return plan;
}

FoldPlan load_fold_plan(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open fold plan " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("fold plan: ") + e.what());
    }
    return fold_plan_from_json(j);
}

void save_fold_plan(const FoldPlan& plan, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write fold plan " + path.string());
    out << to_json(plan).dump(2) << '\n';
}

}  // namespace post
