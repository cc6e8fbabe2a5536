// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "post/geometry.hpp"
#include "post/image.hpp"
#include "post/random.hpp"

namespace post {

enum class QcStatus { accepted, rejected };
enum class Source { clinical, synthetic };

struct QcInfo {
    QcStatus status = QcStatus::accepted;
    std::optional<std::string> reason;

    friend bool operator==(const QcInfo&, const QcInfo&) = default;
};

struct ImageRecord {
    std::string image_id;
    std::string path;  ///< relative paths resolve against the manifest directory
    int width = 0;
    int height = 0;
    LandmarkSet landmarks;  ///< original frame
    BoundingBox gt_box;
    QcInfo qc;
    Source source = Source::clinical;

    bool accepted() const noexcept { return qc.status == QcStatus::accepted; }

    friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

/// Record plus decoded pixels.
struct Sample {
    ImageRecord record;
    Image image;
};

/// Throws BoundsError (landmark outside the image or the gt box) or SchemaError.
void validate_record(const ImageRecord& r);

nlohmann::json to_json(const ImageRecord& r);
/// Throws SchemaError naming the offending field.
ImageRecord record_from_json(const nlohmann::json& j);

/// JSON-lines manifest. Throws SchemaError, BoundsError, DuplicateId, IoError.
std::vector<ImageRecord> load_manifest(const std::filesystem::path& path);
std::vector<ImageRecord> parse_manifest(std::istream& in);
void save_manifest(const std::vector<ImageRecord>& records, const std::filesystem::path& path);

std::filesystem::path resolve_image_path(const std::filesystem::path& manifest_path, const ImageRecord& r);

/// Stable content hash (FNV-1a, hex) of the canonical JSON of the records.
std::string data_hash(const std::vector<ImageRecord>& records);

/// Sampling ranges; the defaults follow the training recipe.
struct AugmentRanges {
    double max_translate_frac = 0.10;
    double max_rotate_deg = 30.0;
    double min_scale = 0.75;
    double max_scale = 1.25;
    double flip_probability = 0.5;
};

/// One concrete augmentation draw.
struct AugmentSpec {
    double translate_x_frac = 0.0;  ///< fraction of the frame width
    double translate_y_frac = 0.0;
    double rotate_deg = 0.0;
    double scale = 1.0;
    bool hflip = false;

    /// Throws InvalidArgument outside rotate [-30, 30], scale [0.75, 1.25], |translate| <= 1.
    void validate() const;
};

AugmentSpec draw_augment(const AugmentRanges& ranges, Rng& rng);

/// translate * rotate * scale about the frame center, followed by the optional
/// horizontal flip of the frame.
Affine2 augmentation_affine(const AugmentSpec& spec, ImageSize frame);

/// Axis-aligned box of the ellipse inscribed in `box`, pushed through `t`.
/// Exact for elliptical objects, far tighter than the corner hull under rotation.
BoundingBox transform_box(const BoundingBox& box, const Affine2& t);

/// Landmarks through an affine; a flip (negative determinant) swaps B<->B', C<->C'.
LandmarkSet transform_landmarks(const LandmarkSet& lm, const Affine2& t);

/// Annotation half of augment(): landmarks and box under the augmentation affine.
/// Throws LandmarkOutOfFrame when a landmark leaves the frame (caller re-draws).
ImageRecord augment_record(const ImageRecord& r, const AugmentSpec& spec);
/// Warps the image and co-transforms landmarks and box.
Sample augment(const Sample& s, const AugmentSpec& spec);

struct FoldPlan {
    std::uint64_t seed = 0;
    int k = 5;
    double val_frac = 0.2;
    std::map<std::string, int> assignments;           ///< image_id -> test fold
    std::vector<std::vector<std::string>> validation;  ///< per fold, drawn from its training portion

    std::vector<std::string> test_ids(int fold) const;
    std::vector<std::string> val_ids(int fold) const;
    /// Training portion minus the validation subset.
    std::vector<std::string> train_ids(int fold) const;
};

/// Throws TooFewRecords when fewer than k accepted records exist.
FoldPlan plan_folds(const std::vector<ImageRecord>& records, int k = 5, double val_frac = 0.2,
                    std::uint64_t seed = 0);

nlohmann::json to_json(const FoldPlan& plan);
FoldPlan fold_plan_from_json(const nlohmann::json& j);
FoldPlan load_fold_plan(const std::filesystem::path& path);
void save_fold_plan(const FoldPlan& plan, const std::filesystem::path& path);

}  // namespace post
