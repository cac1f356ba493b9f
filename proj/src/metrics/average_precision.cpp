// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/metrics/average_precision.hpp"

#include <algorithm>
#include <stdexcept>

namespace flakelens::metrics {

std::vector<PrPoint> pr_points(std::vector<RankedHit> hits, std::size_t num_gt) {
    std::stable_sort(hits.begin(), hits.end(),
                     [](const RankedHit& a, const RankedHit& b) { return a.confidence > b.confidence; });
    std::vector<PrPoint> pts;
    pts.reserve(hits.size());
    std::size_t tp = 0;
    for (std::size_t i = 0; i < hits.size(); ++i) {
        tp += hits[i].tp ? 1 : 0;
        const double recall = num_gt ? static_cast<double>(tp) / static_cast<double>(num_gt) : 0.0;
        pts.push_back({recall, static_cast<double>(tp) / static_cast<double>(i + 1)});
    }
    return pts;
}

namespace {

// Precision envelope: running maximum from the right.
std::vector<PrPoint> envelope(std::vector<PrPoint> pts) {
    for (std::size_t i = pts.size(); i-- > 1;) {
        pts[i - 1].precision = std::max(pts[i - 1].precision, pts[i].precision);
    }
    return pts;
}

}  // namespace

std::optional<double> ap_from_hits(std::vector<RankedHit> hits, std::size_t num_gt) {
    if (num_gt == 0) return std::nullopt;
    const auto env = envelope(pr_points(std::move(hits), num_gt));
    double ap = 0.0;
    double prev_recall = 0.0;
    for (const auto& p : env) {
        if (p.recall > prev_recall) {
            ap += (p.recall - prev_recall) * p.precision;
            prev_recall = p.recall;
        }
    }
    return ap;
}

std::vector<double> pr_samples(std::vector<RankedHit> hits, std::size_t num_gt) {
    std::vector<double> out(101, 0.0);
    if (num_gt == 0) return out;
    const auto env = envelope(pr_points(std::move(hits), num_gt));
    std::size_t j = 0;
    for (int k = 0; k <= 100; ++k) {
        const double r = k / 100.0;
        while (j < env.size() && env[j].recall < r - 1e-12) ++j;
        out[k] = j < env.size() ? env[j].precision : 0.0;
    }
    return out;
}

std::vector<RankedHit> class_hits(std::span<const EvalImage> corpus, int class_id, double iou_thresh, Geometry g) {
    std::vector<RankedHit> hits;
    std::vector<Region> dets, gts;
    for (const auto& img : corpus) {
        dets.clear();
        gts.clear();
        for (const auto& d : img.dets) {
            if (d.class_id == class_id) dets.push_back(d);
        }
        if (dets.empty()) continue;
        for (const auto& t : img.gts) {
            if (t.class_id == class_id) gts.push_back(t);
        }
        const MatchResult m = match_detections(dets, gts, iou_thresh, g, true);
        for (std::size_t i = 0; i < dets.size(); ++i) {
            hits.push_back({dets[i].confidence, m.det_pair[i] >= 0});
        }
    }
    return hits;
}

std::size_t class_gt_count(std::span<const EvalImage> corpus, int class_id) {
    std::size_t n = 0;
    for (const auto& img : corpus) {
        n += static_cast<std::size_t>(
            std::count_if(img.gts.begin(), img.gts.end(), [&](const Region& r) { return r.class_id == class_id; }));
    }
    return n;
}

std::optional<double> average_precision(std::span<const Region> dets, std::span<const Region> gts, int class_id,
                                        double iou_thresh, Geometry g) {
    EvalImage img;
    img.dets.assign(dets.begin(), dets.end());
    img.gts.assign(gts.begin(), gts.end());
    const std::span<const EvalImage> corpus(&img, 1);
    return ap_from_hits(class_hits(corpus, class_id, iou_thresh, g), class_gt_count(corpus, class_id));
}

std::vector<double> iou_range(int last_percent) {
    if (last_percent < 50 || last_percent > 95 || last_percent % 5 != 0) {
        throw std::invalid_argument("IoU range end must be a multiple of 5 in [50, 95]");
    }
    std::vector<double> t;
    for (int p = 50; p <= last_percent; p += 5) t.push_back(p / 100.0);
    return t;
}

std::optional<double> ApTable::class_mean(int class_id) const {
    const auto& row = per_class.at(static_cast<std::size_t>(class_id));
    if (!row) return std::nullopt;
    double s = 0.0;
    for (double v : *row) s += v;
    return s / static_cast<double>(row->size());
}

double ApTable::mean() const {
    double s = 0.0;
    int n = 0;
    for (std::size_t c = 0; c < per_class.size(); ++c) {
        if (const auto m = class_mean(static_cast<int>(c))) {
            s += *m;
            ++n;
        }
    }
    return n ? s / n : 0.0;
}

ApTable ap_table(std::span<const EvalImage> corpus, int num_classes, std::span<const double> thresholds, Geometry g) {
    if (thresholds.empty()) throw std::invalid_argument("at least one IoU threshold is required");
    for (double t : thresholds) {
        if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("IoU thresholds must lie in (0, 1)");
    }
    ApTable table;
    table.thresholds.assign(thresholds.begin(), thresholds.end());
    table.per_class.resize(static_cast<std::size_t>(num_classes));
    bool any_gt = false;
    for (int c = 0; c < num_classes; ++c) {
        const std::size_t n_gt = class_gt_count(corpus, c);
        if (n_gt == 0) continue;
        any_gt = true;
        std::vector<double> row;
        for (double t : thresholds) row.push_back(*ap_from_hits(class_hits(corpus, c, t, g), n_gt));
        table.per_class[c] = std::move(row);
    }
    if (!any_gt) throw std::invalid_argument("the ground-truth corpus is empty");
    return table;
}

double map_at(std::span<const EvalImage> corpus, int num_classes, std::span<const double> thresholds, Geometry g) {
    return ap_table(corpus, num_classes, thresholds, g).mean();
}

}  // namespace flakelens::metrics
