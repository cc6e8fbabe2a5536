// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "post/dataset.hpp"

namespace post {

/// Parametric glans phenotype. Shape parameters are expressed in a local frame
/// (u lateral, v toward the shaft) scaled by the ellipse semi-axes, so the
/// landmark layout is invariant to where and how large the glans is drawn.
struct SynthParams {
    int canvas_width = 256;
    int canvas_height = 256;

    Point2 center{128, 128};
    double semi_axis_lateral = 50.0;       ///< pixels
    double semi_axis_longitudinal = 45.0;  ///< pixels
    double orientation_deg = 0.0;

    double meatal_offset = 0.5;  ///< A sits at v = -meatal_offset
    double plate_width_left = 0.3;
    double plate_width_right = 0.3;
    double knob_level = 0.1;  ///< v of B and B'
    double corona_angle_left_deg = 35.0;
    double corona_angle_right_deg = 35.0;

    std::array<double, 3> skin_tone{200, 150, 120};
    int background_texture = 0;
    std::array<double, 3> background_a{60, 90, 120};
    std::array<double, 3> background_b{30, 40, 60};
    double illumination_gain = 1.0;
    std::uint64_t rng_seed = 0;
};

/// Draws a varied but valid parameter set, including canvas size and placement.
SynthParams sample_synth_params(std::uint64_t seed);

/// Landmarks implied by the parameters, original frame. Throws InvalidParams.
LandmarkSet synth_landmarks(const SynthParams& p);

/// Same phenotype under a similarity (no reflection): center, axes and orientation move.
SynthParams transform_params(const SynthParams& p, const Affine2& similarity);

struct SynthSample {
    ImageRecord record;
    Image image;
    std::vector<std::uint8_t> glans_mask;  ///< width*height, 1 where the pixel center lies on the glans
};

/// Renders the phenotype and emits exact annotations. Deterministic in the
/// parameters (including rng_seed). Throws InvalidParams.
SynthSample synth_generate(const SynthParams& p, const std::string& image_id = "synth");

/// `count` records with ids synth_00000.. and per-record seeds derived from
/// `seed`; independent per record, so the result does not depend on threading.
std::vector<SynthSample> synth_corpus(int count, std::uint64_t seed);

/// Writes <dir>/images/<id>.png and <dir>/manifest.jsonl (relative paths).
/// Returns the manifest path.
std::filesystem::path write_corpus(const std::vector<SynthSample>& corpus, const std::filesystem::path& dir);

/// Records plus pixels, without the masks.
std::vector<Sample> to_samples(const std::vector<SynthSample>& corpus);

}  // namespace post
