// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flakelens/metrics/matching.hpp"

namespace flakelens::metrics {

/// One image's worth of predictions and ground truth, both in pixel space.
struct EvalImage {
    std::string id;
    int width = 0;
    int height = 0;
    std::vector<Region> dets;
    std::vector<Region> gts;
};

/// A ranked detection outcome used to build PR curves.
struct RankedHit {
    double confidence = 0.0;
    bool tp = false;
};

struct PrPoint {
    double recall = 0.0;
    double precision = 0.0;
};

/// Orders hits by descending confidence (stable) and returns cumulative PR points.
std::vector<PrPoint> pr_points(std::vector<RankedHit> hits, std::size_t num_gt);

/// Area under the precision envelope, all-points interpolation. nullopt when
/// num_gt is zero: AP is undefined then, not 0.
std::optional<double> ap_from_hits(std::vector<RankedHit> hits, std::size_t num_gt);

/// Envelope precision sampled at recall 0, 0.01, ..., 1 (101 values).
std::vector<double> pr_samples(std::vector<RankedHit> hits, std::size_t num_gt);

/// Hits of class `class_id` over a corpus, matching class-aware at iou_thresh.
std::vector<RankedHit> class_hits(std::span<const EvalImage> corpus, int class_id, double iou_thresh, Geometry g);
std::size_t class_gt_count(std::span<const EvalImage> corpus, int class_id);

/// AP of one class over a single image's detections and ground truth.
std::optional<double> average_precision(std::span<const Region> dets, std::span<const Region> gts, int class_id,
                                        double iou_thresh, Geometry g = Geometry::box);

/// IoU thresholds (50 + 5k)/100 for k = 0 .. (last-50)/5. last_percent is 90 or 95.
std::vector<double> iou_range(int last_percent = 90);

/// Per-class AP at each threshold. A class without ground truth has no row.
struct ApTable {
    std::vector<double> thresholds;
    std::vector<std::optional<std::vector<double>>> per_class;

    /// Mean over thresholds for one class; nullopt when undefined.
    std::optional<double> class_mean(int class_id) const;
    /// Unweighted mean of class means over classes with ground truth.
    double mean() const;
};

/// Throws std::invalid_argument when thresholds are empty or outside (0, 1),
/// and when the corpus has no ground truth at all.
ApTable ap_table(std::span<const EvalImage> corpus, int num_classes, std::span<const double> thresholds, Geometry g);

/// Per-class AP averaged over thresholds, then averaged over classes present in GT.
double map_at(std::span<const EvalImage> corpus, int num_classes, std::span<const double> thresholds,
              Geometry g = Geometry::box);

}  // namespace flakelens::metrics
