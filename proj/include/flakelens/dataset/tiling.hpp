// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "flakelens/core/image.hpp"
#include "flakelens/core/instance.hpp"

namespace flakelens::dataset {

struct TileOffset {
    int x = 0;
    int y = 0;
    friend bool operator==(const TileOffset&, const TileOffset&) = default;
};

/// Square tiles laid out row-major over a source image. Tiles that run past the
/// right or bottom edge are zero-padded.
struct TileGrid {
    int source_width = 0;
    int source_height = 0;
    int tile = 640;
    int overlap = 0;
    int columns = 0;
    int rows = 0;
    std::vector<TileOffset> tiles;

    int stride() const noexcept { return tile - overlap; }
    /// Width/height of the part of tile `i` covered by source pixels.
    int content_width(std::size_t i) const noexcept;
    int content_height(std::size_t i) const noexcept;
    long long padded_area(std::size_t i) const noexcept;
};

/// Throws std::invalid_argument unless tile >= 32, 0 <= overlap < tile and the
/// source is at least 8x8.
TileGrid make_tile_grid(int source_width, int source_height, int tile = 640, int overlap = 0);

struct TiledImage {
    TileGrid grid;
    std::vector<core::ImageBuffer> tiles;
};

TiledImage tile_image(const core::ImageBuffer& img, int tile = 640, int overlap = 0);

/// Clips source-normalized instances into each tile and renormalizes them to
/// tile coordinates. Fragments smaller than max(1% of the instance, 4 px^2)
/// are dropped. Result is indexed like grid.tiles.
std::vector<std::vector<core::Instance>> retile_annotations(std::span<const core::Instance> instances,
                                                            const TileGrid& grid);

/// Inverse mapping of tile-local labels back into source-normalized
/// coordinates. Fragments are not merged.
std::vector<core::Instance> stitch_annotations(const std::vector<std::vector<core::Instance>>& per_tile,
                                               const TileGrid& grid);

/// Instance geometry expressed in pixel units of a `width` x `height` frame.
/// Box-only instances yield their rectangle.
std::vector<core::Point2> instance_outline_pixels(const core::Instance& inst, int width, int height);

}  // namespace flakelens::dataset
