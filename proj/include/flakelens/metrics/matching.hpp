// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "flakelens/core/instance.hpp"

namespace flakelens::metrics {

enum class Geometry { box, mask };

std::string_view to_string(Geometry g) noexcept;
/// Accepts "box" or "mask"; throws std::invalid_argument otherwise.
Geometry parse_geometry(std::string_view s);

/// Ground truth and predictions share the pixel-space Detection type; the
/// confidence of a ground truth is ignored.
using Region = core::Detection;

struct MatchPair {
    int det = 0;
    int gt = 0;
    double iou = 0.0;
};

struct MatchResult {
    std::vector<MatchPair> pairs;
    std::vector<int> unmatched_dets;
    std::vector<int> unmatched_gts;
    /// For each detection in input order, the index of its pair or -1.
    std::vector<int> det_pair;
};

/// IoU under the chosen geometry. Mask mode throws std::invalid_argument when
/// either region has no mask.
double region_iou(const Region& a, const Region& b, Geometry g);

/// Greedy by descending confidence (stable for ties): each detection takes the
/// unmatched ground truth with the highest IoU >= iou_thresh (lowest index on
/// ties). class_aware restricts candidates to the detection's class.
MatchResult match_detections(std::span<const Region> dets, std::span<const Region> gts, double iou_thresh,
                             Geometry g, bool class_aware = true);

/// Ground truth in pixel space: boxes scaled, polygons rasterized at width x height.
std::vector<Region> truth_regions(std::span<const core::Instance> instances, int width, int height);

}  // namespace flakelens::metrics
