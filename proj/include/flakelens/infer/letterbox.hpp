// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "flakelens/core/geometry.hpp"
#include "flakelens/core/image.hpp"
#include "flakelens/infer/tensor.hpp"

namespace flakelens::infer {

/// Maps between source pixels and the square network input.
struct LetterboxTransform {
    double scale = 1.0;
    int pad_x = 0;
    int pad_y = 0;
    int source_width = 0;
    int source_height = 0;
    int target = 0;

    core::Point2 to_letterbox(core::Point2 p) const noexcept {
        return {p.x * scale + pad_x, p.y * scale + pad_y};
    }
    core::Point2 to_source(core::Point2 p) const noexcept {
        return {(p.x - pad_x) / scale, (p.y - pad_y) / scale};
    }
    core::PixelBox to_letterbox(const core::PixelBox& b) const noexcept;
    /// Unclamped inverse mapping.
    core::PixelBox to_source(const core::PixelBox& b) const noexcept;
};

LetterboxTransform make_letterbox_transform(int source_width, int source_height, int target);

struct Letterboxed {
    core::ImageBuffer image;
    LetterboxTransform transform;
};

inline constexpr std::uint8_t kLetterboxFill = 114;

/// Aspect-preserving bilinear resize onto a target x target canvas filled with
/// gray 114. Throws std::invalid_argument unless target is a positive multiple of 32.
Letterboxed letterbox(const core::ImageBuffer& img, int target);

/// 1x3xHxW planar tensor, values multiplied by `pixel_norm`.
Tensor to_input_tensor(const core::ImageBuffer& img, double pixel_norm);

}  // namespace flakelens::infer
