// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/metrics/matching.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace flakelens::metrics {

std::string_view to_string(Geometry g) noexcept { return g == Geometry::box ? "box" : "mask"; }

Geometry parse_geometry(std::string_view s) {
    if (s == "box") return Geometry::box;
    if (s == "mask") return Geometry::mask;
    throw std::invalid_argument("geometry must be 'box' or 'mask', got '" + std::string(s) + "'");
}

double region_iou(const Region& a, const Region& b, Geometry g) {
    if (g == Geometry::box) {
        return core::iou_box(a.box, b.box);
    }
    if (!a.mask || !b.mask) {
        throw std::invalid_argument("mask geometry requires masks on every region");
    }
    return core::iou_mask(*a.mask, *b.mask);
}

MatchResult match_detections(std::span<const Region> dets, std::span<const Region> gts, double iou_thresh,
                             Geometry g, bool class_aware) {
    std::vector<int> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return dets[a].confidence > dets[b].confidence; });

    MatchResult r;
    r.det_pair.assign(dets.size(), -1);
    std::vector<bool> taken(gts.size(), false);
    for (int d : order) {
        int best = -1;
        double best_iou = 0.0;
        for (std::size_t k = 0; k < gts.size(); ++k) {
            if (taken[k] || (class_aware && gts[k].class_id != dets[d].class_id)) continue;
            const double iou = region_iou(dets[d], gts[k], g);
            if (iou >= iou_thresh && iou > best_iou) {
                best = static_cast<int>(k);
                best_iou = iou;
            }
        }
        if (best < 0) continue;
        taken[best] = true;
        r.det_pair[d] = static_cast<int>(r.pairs.size());
        r.pairs.push_back({d, best, best_iou});
    }
    for (std::size_t d = 0; d < dets.size(); ++d) {
        if (r.det_pair[d] < 0) r.unmatched_dets.push_back(static_cast<int>(d));
    }
    for (std::size_t k = 0; k < gts.size(); ++k) {
        if (!taken[k]) r.unmatched_gts.push_back(static_cast<int>(k));
    }
    return r;
}

std::vector<Region> truth_regions(std::span<const core::Instance> instances, int width, int height) {
    std::vector<Region> out;
    out.reserve(instances.size());
    for (const auto& inst : instances) {
        Region r;
        r.class_id = inst.class_id;
        r.confidence = 1.0;
        r.box = core::norm_to_pixel(inst.box, width, height);
        r.mask = inst.mask ? core::rasterize(*inst.mask, width, height) : core::rasterize_box(r.box, width, height);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace flakelens::metrics
