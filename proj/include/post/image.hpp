// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "post/geometry.hpp"

namespace post {

/// Interleaved 8-bit RGB, row-major.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;

    Image() = default;
    Image(int w, int h, std::uint8_t fill = 0) : width(w), height(h), rgb(std::size_t(w) * h * 3, fill) {}

    ImageSize size() const noexcept { return {width, height}; }
    bool empty() const noexcept { return rgb.empty(); }
    std::uint8_t* pixel(int x, int y) { return rgb.data() + (std::size_t(y) * width + x) * 3; }
    const std::uint8_t* pixel(int x, int y) const { return rgb.data() + (std::size_t(y) * width + x) * 3; }

    friend bool operator==(const Image&, const Image&) = default;
};

/// PNG or JPEG. Throws IoError.
Image load_image(const std::filesystem::path& path);
Image decode_image(std::span<const std::uint8_t> bytes);
void save_png(const Image& img, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_png(const Image& img);

inline constexpr std::uint8_t kPadValue = 128;

/// Resamples `src` through `dst_from_src` into a width x height image with
/// bilinear interpolation; samples outside `src` take kPadValue.
Image warp_affine(const Image& src, const Affine2& dst_from_src, int width, int height);

/// Same sampling, written as normalized planar float channels (C, H, W) into
/// `out`, which must hold 3 * width * height values.
void warp_to_planar(const Image& src, const Affine2& dst_from_src, int width, int height, std::span<float> out);

/// Per-channel normalization applied by warp_to_planar: (v / 255 - 0.5) / 0.25.
inline float normalize_channel(float v) noexcept { return (v / 255.0f - 0.5f) * 4.0f; }

}  // namespace post
