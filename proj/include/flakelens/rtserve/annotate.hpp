// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "flakelens/core/class_set.hpp"
#include "flakelens/core/image.hpp"
#include "flakelens/core/instance.hpp"
#include "flakelens/rtserve/live_config.hpp"

namespace flakelens::rtserve {

using Rgb = std::array<std::uint8_t, 3>;

/// Fixed per-class color; cycles for large class ids.
Rgb class_color(int class_id) noexcept;

/// Integer pixel rectangle [x0, x1) x [y0, y1) covered by a box, using the
/// pixel-center rule, clipped to the image. Empty when x0 >= x1 or y0 >= y1.
struct PixelRect {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};
PixelRect pixel_rect(const core::PixelBox& box, int width, int height) noexcept;

/// Draws masks (40% blend), then 2-px box outlines inside the pixel rect,
/// then "name conf" labels above each box. Deterministic.
core::ImageBuffer annotate_frame(const core::ImageBuffer& img, std::span<const core::Detection> dets,
                                 const OverlayOptions& overlay, const core::ClassSet& classes);

}  // namespace flakelens::rtserve
