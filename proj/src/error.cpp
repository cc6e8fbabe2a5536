// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "post/error.hpp"

namespace post {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateBox: return "DegenerateBox";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::WrongFrame: return "WrongFrame";
    case ErrorCode::OutOfFrame: return "OutOfFrame";
    case ErrorCode::FlatHeatmap: return "FlatHeatmap";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyGroundTruth: return "EmptyGroundTruth";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DegenerateNormalizer: return "DegenerateNormalizer";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::BoundsError: return "BoundsError";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::LandmarkOutOfFrame: return "LandmarkOutOfFrame";
    case ErrorCode::TooFewRecords: return "TooFewRecords";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::DataEmpty: return "DataEmpty";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::NoDetection: return "NoDetection";
    case ErrorCode::DecodeFailure: return "DecodeFailure";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace post
