// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "flakelens/metrics/average_precision.hpp"

namespace flakelens::metrics {

/// (C+1) x (C+1) counts indexed [gt class][predicted class]; index C is background.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int num_classes);

    int num_classes() const noexcept { return n_; }
    int background() const noexcept { return n_; }
    long at(int gt, int pred) const { return cells_.at(index(gt, pred)); }
    void add(int gt, int pred) { ++cells_.at(index(gt, pred)); }
    long row_sum(int gt) const;
    long total() const;
    /// Diagonal over the row sum; nullopt for a class with no ground truth.
    std::optional<double> accuracy(int class_id) const;

private:
    std::size_t index(int gt, int pred) const;
    int n_;
    std::vector<long> cells_;
};

/// Class-blind greedy matching per image over detections with confidence >= conf_thresh.
ConfusionMatrix confusion_matrix(std::span<const EvalImage> corpus, int num_classes, double iou_thresh = 0.5,
                                 double conf_thresh = 0.25, Geometry g = Geometry::box);

}  // namespace flakelens::metrics
