// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "post/geometry.hpp"

namespace post::models {

/// Greedy non-maximum suppression. Boxes below conf_threshold are dropped;
/// the rest are visited by descending confidence (stable for ties) and a box
/// is suppressed when its IoU with any kept box exceeds iou_threshold.
/// Output is sorted by confidence, descending.
std::vector<BoundingBox> nms(std::vector<BoundingBox> boxes, double iou_threshold, double conf_threshold);

}  // namespace post::models
