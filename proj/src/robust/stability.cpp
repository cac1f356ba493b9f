// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/robust/stability.hpp"

#include <fstream>
#include <iomanip>
#include <stdexcept>

#include "flakelens/metrics/matching.hpp"

namespace flakelens::robust {

StabilityReport stability_report(std::span<const core::Detection> baseline, std::span<const core::Detection> perturbed,
                                 double iou_thresh) {
    StabilityReport r;
    r.count_delta = static_cast<long>(perturbed.size()) - static_cast<long>(baseline.size());
    if (baseline.empty()) return r;

    const auto m = metrics::match_detections(perturbed, baseline, iou_thresh, metrics::Geometry::box, false);
    std::size_t same_class = 0;
    double iou_sum = 0.0;
    for (const auto& p : m.pairs) {
        same_class += perturbed[p.det].class_id == baseline[p.gt].class_id ? 1 : 0;
        iou_sum += p.iou;
    }
    r.match_rate = static_cast<double>(same_class) / static_cast<double>(baseline.size());
    if (m.pairs.empty()) {
        r.class_consistency = 0.0;
        r.mean_matched_iou = 0.0;
    } else {
        r.class_consistency = static_cast<double>(same_class) / static_cast<double>(m.pairs.size());
        r.mean_matched_iou = iou_sum / static_cast<double>(m.pairs.size());
    }
    return r;
}

void write_csv(std::ostream& out, std::span<const RobustRecord> records) {
    out << kRobustCsvHeader << '\n';
    out << std::fixed;
    for (const auto& rec : records) {
        std::string image = rec.image;
        if (image.find_first_of(",\"\n") != std::string::npos) {
            std::string quoted = "\"";
            for (char c : image) {
                if (c == '"') quoted += '"';
                quoted += c;
            }
            image = quoted + "\"";
        }
        out << image << ',' << to_string(rec.perturbation.kind) << ',' << std::setprecision(4)
            << rec.perturbation.table_strength() << ',' << rec.perturbation.seed << ',' << std::setprecision(6)
            << rec.report.match_rate << ',' << rec.report.class_consistency << ',' << rec.report.mean_matched_iou
            << ',' << rec.report.count_delta << '\n';
    }
}

void write_csv(const std::filesystem::path& path, std::span<const RobustRecord> records) {
    std::ofstream out(path);
    write_csv(out, records);
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::vector<RobustRecord> run_battery(infer::Detector& detector, const core::ImageBuffer& image,
                                      const std::string& image_name, std::span<const Perturbation> battery,
                                      const infer::DetectOptions& options) {
    const auto baseline = detector.detect(image, options).detections;
    std::vector<RobustRecord> out;
    for (const auto& p : battery) {
        const core::ImageBuffer perturbed = apply(image, p);
        auto dets = detector.detect(perturbed, options).detections;
        if (perturbed.width() != image.width() || perturbed.height() != image.height()) {
            const double sx = static_cast<double>(image.width()) / perturbed.width();
            const double sy = static_cast<double>(image.height()) / perturbed.height();
            for (auto& d : dets) {
                d.box = {d.box.x0 * sx, d.box.y0 * sy, d.box.x1 * sx, d.box.y1 * sy};
                d.mask.reset();
            }
        }
        out.push_back({image_name, p, stability_report(baseline, dets)});
    }
    return out;
}

}  // namespace flakelens::robust
