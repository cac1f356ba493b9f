// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "flakelens/core/class_set.hpp"
#include "flakelens/metrics/confusion.hpp"

namespace flakelens::metrics {

struct EvalConfig {
    Geometry geometry = Geometry::box;
    /// Upper end of the averaged IoU range in percent: 90 (default) or 95.
    int range_end = 90;
    double confusion_iou = 0.5;
    double confusion_conf = 0.25;
};

struct ClassSummary {
    std::size_t gt_count = 0;
    std::size_t det_count = 0;
    /// Per threshold of EvalReport::thresholds; nullopt when the class has no GT.
    std::optional<std::vector<double>> ap;
    /// PR envelope at IoU 0.5, 101 recall samples.
    std::vector<double> pr_precision;
};

struct EvalReport {
    std::vector<std::string> class_names;
    Geometry geometry = Geometry::box;
    std::vector<double> thresholds;
    std::vector<ClassSummary> classes;
    double map50 = 0.0;
    double map_range = 0.0;
    int range_end = 90;
    ConfusionMatrix confusion{0};
    std::size_t images = 0;

    std::string range_label() const { return "mAP50-" + std::to_string(range_end); }
};

EvalReport evaluate(std::span<const EvalImage> corpus, const core::ClassSet& classes, const EvalConfig& config = {});

/// The indented text tree written to report.eval.
std::string format_report(const EvalReport& r);
nlohmann::json to_json(const EvalReport& r);
/// Throws std::runtime_error naming the path on I/O failure.
void write_report(const EvalReport& r, const std::filesystem::path& path);

/// Pairs <pred_dir>/<id>.json prediction files with YOLO label files under
/// gt_dir (either <gt_dir>/labels or gt_dir itself). Image ids present on
/// either side are included; a label without predictions needs an image in
/// <gt_dir>/images to learn its size.
std::vector<EvalImage> load_corpus(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir,
                                   const core::ClassSet& classes);

}  // namespace flakelens::metrics
