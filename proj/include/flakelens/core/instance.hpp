// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

#include "flakelens/core/bitmask.hpp"
#include "flakelens/core/geometry.hpp"

namespace flakelens::core {

/// Ground-truth annotation in normalized image coordinates.
struct Instance {
    int class_id = 0;
    NormBox box = NormBox::make(0.5, 0.5, 1.0, 1.0);
    std::optional<PolygonMask> mask;

    /// Box derived from the polygon's bounding box.
    static Instance from_polygon(int class_id, PolygonMask poly);

    friend bool operator==(const Instance&, const Instance&) = default;
};

/// Model prediction in pixel coordinates of some frame.
struct Detection {
    int class_id = 0;
    double confidence = 0.0;
    PixelBox box;
    std::optional<BitMask> mask;
};

}  // namespace flakelens::core
