// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/metrics/confusion.hpp"

#include <numeric>
#include <stdexcept>

namespace flakelens::metrics {

ConfusionMatrix::ConfusionMatrix(int num_classes)
    : n_(num_classes), cells_(static_cast<std::size_t>(num_classes + 1) * (num_classes + 1), 0) {
    if (num_classes < 0) throw std::invalid_argument("negative class count");
}

std::size_t ConfusionMatrix::index(int gt, int pred) const {
    if (gt < 0 || gt > n_ || pred < 0 || pred > n_) throw std::out_of_range("confusion matrix index");
    return static_cast<std::size_t>(gt) * (n_ + 1) + pred;
}

long ConfusionMatrix::row_sum(int gt) const {
    long s = 0;
    for (int p = 0; p <= n_; ++p) s += at(gt, p);
    return s;
}

long ConfusionMatrix::total() const { return std::accumulate(cells_.begin(), cells_.end(), 0L); }

std::optional<double> ConfusionMatrix::accuracy(int class_id) const {
    const long row = row_sum(class_id);
    if (row == 0) return std::nullopt;
    return static_cast<double>(at(class_id, class_id)) / static_cast<double>(row);
}

ConfusionMatrix confusion_matrix(std::span<const EvalImage> corpus, int num_classes, double iou_thresh,
                                 double conf_thresh, Geometry g) {
    ConfusionMatrix m(num_classes);
    const int bg = m.background();
    auto check = [&](int c) {
        if (c < 0 || c >= num_classes) throw std::invalid_argument("class id " + std::to_string(c) + " out of range");
        return c;
    };
    std::vector<Region> dets;
    for (const auto& img : corpus) {
        dets.clear();
        for (const auto& d : img.dets) {
            if (d.confidence >= conf_thresh) dets.push_back(d);
        }
        const MatchResult r = match_detections(dets, img.gts, iou_thresh, g, false);
        for (const auto& p : r.pairs) m.add(check(img.gts[p.gt].class_id), check(dets[p.det].class_id));
        for (int k : r.unmatched_gts) m.add(check(img.gts[k].class_id), bg);
        for (int d : r.unmatched_dets) m.add(bg, check(dets[d].class_id));
    }
    return m;
}

}  // namespace flakelens::metrics
