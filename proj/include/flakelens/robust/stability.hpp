// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "flakelens/core/instance.hpp"
#include "flakelens/infer/detector.hpp"
#include "flakelens/robust/perturb.hpp"

namespace flakelens::robust {

struct StabilityReport {
    /// Baseline detections re-found at IoU >= threshold with the same class.
    double match_rate = 1.0;
    /// Matched pairs whose classes agree.
    double class_consistency = 1.0;
    double mean_matched_iou = 1.0;
    /// perturbed count - baseline count.
    long count_delta = 0;

    bool perfect() const noexcept {
        return match_rate == 1.0 && class_consistency == 1.0 && mean_matched_iou == 1.0 && count_delta == 0;
    }
};

/// Class-blind greedy box matching with perturbed detections ranked by
/// confidence against baseline detections. With an empty baseline every
/// ratio is vacuously 1; with a non-empty baseline and no pairs they are 0.
StabilityReport stability_report(std::span<const core::Detection> baseline, std::span<const core::Detection> perturbed,
                                 double iou_thresh = 0.5);

struct RobustRecord {
    std::string image;
    Perturbation perturbation;
    StabilityReport report;
};

inline constexpr const char* kRobustCsvHeader =
    "image,kind,strength,seed,match_rate,class_consistency,mean_iou,count_delta";

void write_csv(std::ostream& out, std::span<const RobustRecord> records);
void write_csv(const std::filesystem::path& path, std::span<const RobustRecord> records);

/// Runs the detector on each image unperturbed and under each perturbation.
/// Downscaled detections are compared after scaling their boxes back to the
/// source frame.
std::vector<RobustRecord> run_battery(infer::Detector& detector, const core::ImageBuffer& image,
                                      const std::string& image_name, std::span<const Perturbation> battery,
                                      const infer::DetectOptions& options);

}  // namespace flakelens::robust
