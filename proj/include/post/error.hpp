// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace post {

enum class ErrorCode {
    InvalidArgument,
    DegenerateBox,
    DegenerateGeometry,
    WrongFrame,
    OutOfFrame,
    FlatHeatmap,
    ShapeMismatch,
    EmptyGroundTruth,
    EmptyInput,
    DegenerateNormalizer,
    SchemaError,
    BoundsError,
    DuplicateId,
    LandmarkOutOfFrame,
    TooFewRecords,
    InvalidParams,
    ConfigMismatch,
    DataEmpty,
    NonFiniteLoss,
    NoDetection,
    DecodeFailure,
    IoError,
};

/// Stable wire name of an error code ("DegenerateGeometry", ...).
std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + detail),
          code_(code), detail_(detail) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

}  // namespace post
