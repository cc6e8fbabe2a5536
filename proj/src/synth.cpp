// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "post/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "post/error.hpp"

namespace post {

namespace {

using Rgb = std::array<double, 3>;

constexpr double kCoronaInset = 0.92;

Rgb lerp(const Rgb& a, const Rgb& b, double t) {
    return {a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t, a[2] + (b[2] - a[2]) * t};
}

Rgb scaled(const Rgb& c, double g) { return {c[0] * g, c[1] * g, c[2] * g}; }

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

// Normalized local coordinates: s = u / a, t = v / b.
struct LocalFrame {
    Point2 center;
    double a, b, cs, sn;

    explicit LocalFrame(const SynthParams& p)
        : center(p.center), a(p.semi_axis_lateral), b(p.semi_axis_longitudinal),
          cs(std::cos(deg2rad(p.orientation_deg))), sn(std::sin(deg2rad(p.orientation_deg))) {}

    Point2 to_world(double s, double t) const {
        const double u = s * a, v = t * b;
        return {center.x + cs * u - sn * v, center.y + sn * u + cs * v};
    }
    Point2 to_local(Point2 w) const {
        const double dx = w.x - center.x, dy = w.y - center.y;
        return {(cs * dx + sn * dy) / a, (-sn * dx + cs * dy) / b};
    }
};

struct Layout {
    Point2 a, b, bp, c, cp;  // normalized local
};

Layout layout(const SynthParams& p) {
    const double phl = deg2rad(p.corona_angle_left_deg), phr = deg2rad(p.corona_angle_right_deg);
    return {{0.0, -p.meatal_offset},
            {-p.plate_width_left, p.knob_level},
            {p.plate_width_right, p.knob_level},
            {-kCoronaInset * std::cos(phl), kCoronaInset * std::sin(phl)},
            {kCoronaInset * std::cos(phr), kCoronaInset * std::sin(phr)}};
}

void check_params(const SynthParams& p) {
    auto bad = [](const std::string& why) { throw Error(ErrorCode::InvalidParams, why); };
    if (p.canvas_width < 16 || p.canvas_height < 16) bad("canvas too small");
    if (!(p.semi_axis_lateral > 2.0) || !(p.semi_axis_longitudinal > 2.0)) bad("glans axes must exceed 2 px");
    if (!(p.meatal_offset > 0.05 && p.meatal_offset < 0.85)) bad("meatal_offset outside (0.05, 0.85)");
    if (!(p.plate_width_left > 0.02 && p.plate_width_left < 0.6) || !(p.plate_width_right > 0.02 && p.plate_width_right < 0.6)) {
        bad("plate width outside (0.02, 0.6)");
    }
    if (!(p.knob_level > -p.meatal_offset + 0.05 && p.knob_level < 0.5)) bad("knob level must lie below A and above 0.5");
    for (double phi : {p.corona_angle_left_deg, p.corona_angle_right_deg}) {
        if (!(phi > 5.0 && phi < 75.0)) bad("corona angle outside (5, 75) degrees");
        if (!(kCoronaInset * std::sin(deg2rad(phi)) > p.knob_level + 0.05)) bad("corona must lie below the knobs");
    }
    if (!(p.illumination_gain > 0.0)) bad("illumination gain must be positive");
}

double hash_noise(std::uint64_t seed, int x, int y, int c) {
    std::uint64_t z = seed ^ (static_cast<std::uint64_t>(x) * 0x9e3779b97f4a7c15ULL) ^
                      (static_cast<std::uint64_t>(y) * 0xc2b2ae3d27d4eb4fULL) ^ (static_cast<std::uint64_t>(c) << 56);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53 - 0.5;
}

Rgb background(const SynthParams& p, double x, double y) {
    const Rgb& ca = p.background_a;
    const Rgb& cb = p.background_b;
    switch (p.background_texture % 4) {
    case 0: return lerp(ca, cb, std::clamp((x + y) / (p.canvas_width + p.canvas_height), 0.0, 1.0));
    case 1: return lerp(ca, cb, 0.5 + 0.5 * std::sin(0.35 * (0.8 * x + 0.6 * y)));
    case 2: return ((static_cast<int>(x / 18) + static_cast<int>(y / 18)) % 2) ? ca : cb;
    default: {
        const double v = std::sin(0.07 * x + 1.3) * std::cos(0.05 * y - 0.4) + 0.5 * std::sin(0.13 * (x - y));
        return lerp(ca, cb, std::clamp(0.5 + 0.35 * v, 0.0, 1.0));
    }
    }
}

double lerp1(double a, double b, double t) { return a + (b - a) * t; }

// Shades one sample point; returns true when it lies on the glans.
bool shade(const SynthParams& p, const LocalFrame& f, const Layout& L, double x, double y, Rgb& out) {
    const Point2 q = f.to_local({x, y});
    const double s = q.x, t = q.y;
    const double r2 = s * s + t * t;
    const double gain = p.illumination_gain;

    out = background(p, x, y);

    // shaft: below the C-C' line, between edges flaring slightly outward
    const double tc = lerp1(L.c.y, L.cp.y, std::clamp((s - L.c.x) / (L.cp.x - L.c.x), 0.0, 1.0));
    const double left = L.c.x - 0.1 * (t - L.c.y), right = L.cp.x + 0.1 * (t - L.cp.y);
    const bool shaft = t >= tc && s >= left && s <= right && t < 6.0;
    if (shaft) {
        const double edge = std::min(s - left, right - s) / std::max(right - left, 1e-6);
        out = scaled(p.skin_tone, gain * (0.78 + 0.5 * std::min(edge, 0.35)));
        if (r2 > 1.0 && r2 < 1.12) out = scaled(out, 0.62);  // coronal sulcus
    }
    if (r2 > 1.0) return false;

    const Rgb glans_tone = lerp(p.skin_tone, Rgb{225, 110, 120}, 0.45);
    out = scaled(glans_tone, gain * (1.08 - 0.3 * r2));

    // urethral plate: A -> B -> lower edge, mirrored on the right
    const double t_top = L.a.y, t_knob = L.b.y, t_bot = std::min(L.c.y, L.cp.y) + 0.04;
    if (t >= t_top && t <= t_bot) {
        double xl, xr;
        if (t <= t_knob) {
            const double w = (t - t_top) / (t_knob - t_top);
            xl = lerp1(-0.1, L.b.x, w);
            xr = lerp1(0.1, L.bp.x, w);
        } else {
            const double w = (t - t_knob) / (t_bot - t_knob);
            xl = lerp1(L.b.x, 0.55 * L.b.x, w);
            xr = lerp1(L.bp.x, 0.55 * L.bp.x, w);
        }
        if (s >= xl && s <= xr) {
            const double groove = 0.75 + 0.25 * std::min(1.0, std::abs(s) / 0.06);
            const double rim = std::min(s - xl, xr - s) < 0.025 ? 0.7 : 1.0;
            out = scaled(Rgb{205, 75, 85}, gain * groove * rim);
        }
    }

    // meatus, its distal edge at A
    const double ms = s / 0.09, mt = (t - (L.a.y + 0.1)) / 0.1;
    if (ms * ms + mt * mt <= 1.0) out = scaled(Rgb{70, 20, 30}, gain);
    return true;
}

}  // namespace

LandmarkSet synth_landmarks(const SynthParams& p) {
    check_params(p);
    const LocalFrame f(p);
    const Layout L = layout(p);
    LandmarkSet lm;
    lm.frame = Frame::original;
    lm[Landmark::A] = f.to_world(L.a.x, L.a.y);
    lm[Landmark::B] = f.to_world(L.b.x, L.b.y);
    lm[Landmark::Bp] = f.to_world(L.bp.x, L.bp.y);
    lm[Landmark::C] = f.to_world(L.c.x, L.c.y);
    lm[Landmark::Cp] = f.to_world(L.cp.x, L.cp.y);
    if (!(distance(lm[Landmark::C], lm[Landmark::Cp]) > 1e-6)) throw Error(ErrorCode::InvalidParams, "C and C' coincide");
    for (const auto& pt : lm.points) {
        if (!(pt.x >= 0 && pt.x < p.canvas_width && pt.y >= 0 && pt.y < p.canvas_height)) {
            throw Error(ErrorCode::InvalidParams, "landmark falls outside the canvas");
        }
    }
    return lm;
}

SynthParams transform_params(const SynthParams& p, const Affine2& t) {
    const double s = std::sqrt(t.determinant());
    if (!(t.determinant() > 0.0)) throw Error(ErrorCode::InvalidArgument, "transform must preserve orientation");
    SynthParams out = p;
    out.center = t.apply(p.center);
    out.semi_axis_lateral *= s;
    out.semi_axis_longitudinal *= s;
    out.orientation_deg += std::atan2(t.c, t.a) * 180.0 / std::numbers::pi;
    return out;
}

SynthParams sample_synth_params(std::uint64_t seed) {
    Rng rng = Rng::derive(seed, 0x5e7);
    SynthParams p;
    p.rng_seed = seed;
    p.canvas_width = 224 + static_cast<int>(rng.below(97));
    p.canvas_height = 192 + static_cast<int>(rng.below(97));
    const double max_a = std::min(70.0, 0.3 * std::min(p.canvas_width, p.canvas_height));
    p.semi_axis_lateral = rng.uniform(28.0, max_a);
    p.semi_axis_longitudinal = p.semi_axis_lateral * rng.uniform(0.8, 1.15);
    p.orientation_deg = rng.uniform(-25.0, 25.0);

    const double th = deg2rad(p.orientation_deg);
    const double a = p.semi_axis_lateral, b = p.semi_axis_longitudinal;
    const double ex = std::hypot(a * std::cos(th), b * std::sin(th));
    const double ey = std::hypot(a * std::sin(th), b * std::cos(th));
    const double margin = 6.0;
    p.center = {rng.uniform(ex + margin, p.canvas_width - ex - margin),
                rng.uniform(ey + margin, p.canvas_height - ey - margin)};

    p.meatal_offset = rng.uniform(0.35, 0.7);
    const double plate = rng.uniform(0.18, 0.42);
    p.plate_width_left = plate + rng.uniform(-0.05, 0.05);
    p.plate_width_right = plate + rng.uniform(-0.05, 0.05);
    p.knob_level = rng.uniform(-0.15, 0.2);
    const double phi = rng.uniform(28.0, 50.0);
    p.corona_angle_left_deg = phi + rng.uniform(-5.0, 5.0);
    p.corona_angle_right_deg = phi + rng.uniform(-5.0, 5.0);

    const Rgb light{235, 190, 160}, dark{110, 70, 50};
    p.skin_tone = lerp(light, dark, rng.uniform());
    for (auto& c : p.skin_tone) c = std::clamp(c + rng.uniform(-12.0, 12.0), 0.0, 255.0);
    p.background_texture = static_cast<int>(rng.below(4));
    for (auto& c : p.background_a) c = rng.uniform(20.0, 230.0);
    for (auto& c : p.background_b) c = rng.uniform(20.0, 230.0);
    p.illumination_gain = rng.uniform(0.75, 1.2);
    return p;
}

SynthSample synth_generate(const SynthParams& p, const std::string& image_id) {
    const LandmarkSet lm = synth_landmarks(p);
    const LocalFrame f(p);
    const Layout L = layout(p);
    const int w = p.canvas_width, h = p.canvas_height;

    SynthSample out;
    out.image = Image(w, h);
    out.glans_mask.assign(std::size_t(w) * h, 0);
    static constexpr double kSub[2] = {0.25, 0.75};

#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        Rgb c;
        for (int x = 0; x < w; ++x) {
            Rgb acc{0, 0, 0};
            for (double sy : kSub) {
                for (double sx : kSub) {
                    shade(p, f, L, x + sx, y + sy, c);
                    for (int k = 0; k < 3; ++k) acc[k] += c[k] / 4;
                }
            }
            out.glans_mask[std::size_t(y) * w + x] = shade(p, f, L, x + 0.5, y + 0.5, c) ? 1 : 0;
            auto* px = out.image.pixel(x, y);
            for (int k = 0; k < 3; ++k) {
                const double v = acc[k] + 8.0 * hash_noise(p.rng_seed, x, y, k);
                px[k] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
            }
        }
    }

    int x0 = w, y0 = h, x1 = -1, y1 = -1;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!out.glans_mask[std::size_t(y) * w + x]) continue;
            x0 = std::min(x0, x);
            y0 = std::min(y0, y);
            x1 = std::max(x1, x);
            y1 = std::max(y1, y);
        }
    }
    if (x1 < 0) throw Error(ErrorCode::InvalidParams, "glans is not visible on the canvas");

    ImageRecord& r = out.record;
    r.image_id = image_id;
    r.path = image_id + ".png";
    r.width = w;
    r.height = h;
    r.landmarks = lm;
    r.gt_box = {static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(x1 + 1),
                static_cast<double>(y1 + 1), 1.0};
    r.qc = {QcStatus::accepted, std::nullopt};
    r.source = Source::synthetic;
    for (std::size_t k = 0; k < kNumLandmarks; ++k) {
        const Point2 pt = lm.points[k];
        const auto px = static_cast<int>(pt.x), py = static_cast<int>(pt.y);
        if (!out.glans_mask[std::size_t(py) * w + px]) {
            throw Error(ErrorCode::InvalidParams, "landmark " + std::string(kLandmarkKeys[k]) + " off the rendered glans");
        }
    }
    validate_record(r);
    return out;
}

std::vector<SynthSample> synth_corpus(int count, std::uint64_t seed) {
    if (count < 0) throw Error(ErrorCode::InvalidArgument, "count must be non-negative");
    std::vector<SynthSample> out(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < count; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "synth_%05d", i);
        out[i] = synth_generate(sample_synth_params(Rng::derive(seed, 0x5e7, std::uint64_t(i)).next()), id);
    }
    return out;
}

std::filesystem::path write_corpus(const std::vector<SynthSample>& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "images");
    std::vector<ImageRecord> records;
    for (const auto& s : corpus) {
        ImageRecord r = s.record;
        r.path = "images/" + r.image_id + ".png";
        save_png(s.image, dir / r.path);
        records.push_back(std::move(r));
    }
    const auto manifest = dir / "manifest.jsonl";
    save_manifest(records, manifest);
    return manifest;
}

std::vector<Sample> to_samples(const std::vector<SynthSample>& corpus) {
    std::vector<Sample> out;
    out.reserve(corpus.size());
    for (const auto& s : corpus) out.push_back({s.record, s.image});
    return out;
}

}  // namespace post
