// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "flakelens/core/bitmask.hpp"
#include "flakelens/core/instance.hpp"
#include "flakelens/infer/letterbox.hpp"
#include "flakelens/infer/manifest.hpp"
#include "flakelens/infer/tensor.hpp"

namespace flakelens::infer {

/// Decoded candidate in letterboxed coordinates plus its mask coefficients.
struct Candidate {
    core::Detection detection;
    std::vector<float> coefficients;
    /// Row index in the prediction tensor.
    std::size_t index = 0;
};

/// Argmax class per candidate, confidence = that score (after sigmoid for
/// logit layouts); candidates with confidence < conf_thresh or an empty box
/// are discarded.
std::vector<Candidate> decode_detections(const RawOutputs& raw, const ModelManifest& manifest, double conf_thresh);

/// Greedy non-maximum suppression. Returns kept indices into `dets`, in
/// descending confidence order (ties keep the lower index first). A candidate
/// is kept iff its IoU with every kept candidate (of the same class when
/// class_aware) is below iou_thresh.
std::vector<std::size_t> nms_indices(std::span<const core::Detection> dets, double iou_thresh, bool class_aware);
std::vector<core::Detection> nms(std::span<const core::Detection> dets, double iou_thresh, bool class_aware);

/// Prototype mask for one detection: sigmoid(coeffs . prototypes), bilinear
/// upsample to target x target, zero outside `box`, set where value >= 0.5.
/// `prototypes` is [1, K, h, w] or [K, h, w]. Throws std::invalid_argument when
/// coefficient and prototype counts differ.
core::BitMask compose_mask(std::span<const float> coefficients, const Tensor& prototypes,
                           const core::PixelBox& box, int target);

/// Maps letterboxed detections back to source pixels: boxes are clamped to
/// the source bounds, masks resampled (nearest) to the source resolution.
std::vector<core::Detection> unmap_coords(std::vector<core::Detection> dets, const LetterboxTransform& t);

}  // namespace flakelens::infer
