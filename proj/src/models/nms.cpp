// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "post/models/nms.hpp"

#include <algorithm>

#include "post/error.hpp"
#include "post/metrics.hpp"

namespace post::models {

std::vector<BoundingBox> nms(std::vector<BoundingBox> boxes, double iou_threshold, double conf_threshold) {
    if (!(iou_threshold > 0 && iou_threshold < 1) || !(conf_threshold > 0 && conf_threshold < 1)) {
        throw Error(ErrorCode::InvalidArgument, "nms thresholds must be in (0,1)");
    }
    std::erase_if(boxes, [&](const BoundingBox& b) { return b.confidence < conf_threshold; });
    std::stable_sort(boxes.begin(), boxes.end(),
                     [](const BoundingBox& a, const BoundingBox& b) { return a.confidence > b.confidence; });
    std::vector<BoundingBox> kept;
    for (const auto& b : boxes) {
        const bool suppressed =
            std::any_of(kept.begin(), kept.end(), [&](const BoundingBox& k) { return iou(k, b) > iou_threshold; });
        if (!suppressed) kept.push_back(b);
    }
    return kept;
}

}  // namespace post::models
