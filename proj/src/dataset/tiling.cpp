// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/dataset/tiling.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>
#include <string>

namespace flakelens::dataset {

using core::ImageBuffer;
using core::Instance;
using core::Point2;

int TileGrid::content_width(std::size_t i) const noexcept {
    return std::clamp(source_width - tiles[i].x, 0, tile);
}

int TileGrid::content_height(std::size_t i) const noexcept {
    return std::clamp(source_height - tiles[i].y, 0, tile);
}

long long TileGrid::padded_area(std::size_t i) const noexcept {
    return static_cast<long long>(tile) * tile -
           static_cast<long long>(content_width(i)) * content_height(i);
}

TileGrid make_tile_grid(int source_width, int source_height, int tile, int overlap) {
    if (tile < 32) {
        throw std::invalid_argument("tile size must be at least 32, got " + std::to_string(tile));
    }
    if (overlap < 0 || overlap >= tile) {
        throw std::invalid_argument("overlap must be in [0, tile), got " + std::to_string(overlap));
    }
    if (source_width < 8 || source_height < 8) {
        throw std::invalid_argument("image must be at least 8x8 to tile, got " + std::to_string(source_width) +
                                    "x" + std::to_string(source_height));
    }
    TileGrid grid;
    grid.source_width = source_width;
    grid.source_height = source_height;
    grid.tile = tile;
    grid.overlap = overlap;
    const int stride = grid.stride();
    grid.columns = (source_width + stride - 1) / stride;
    grid.rows = (source_height + stride - 1) / stride;
    grid.tiles.reserve(static_cast<std::size_t>(grid.columns) * grid.rows);
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.columns; ++c) {
            grid.tiles.push_back({c * stride, r * stride});
        }
    }
    return grid;
}

TiledImage tile_image(const ImageBuffer& img, int tile, int overlap) {
    TiledImage out{make_tile_grid(img.width(), img.height(), tile, overlap), {}};
    out.tiles.reserve(out.grid.tiles.size());
    for (std::size_t i = 0; i < out.grid.tiles.size(); ++i) {
        const TileOffset off = out.grid.tiles[i];
        ImageBuffer t(tile, tile);
        const int cw = out.grid.content_width(i);
        const int ch = out.grid.content_height(i);
        for (int y = 0; y < ch; ++y) {
            const auto src = img.row(off.y + y);
            std::memcpy(t.row(y).data(), src.data() + static_cast<std::size_t>(off.x) * 3,
                        static_cast<std::size_t>(cw) * 3);
        }
        out.tiles.push_back(std::move(t));
    }
    return out;
}

std::vector<Point2> instance_outline_pixels(const Instance& inst, int width, int height) {
    std::vector<Point2> pts;
    if (inst.mask) {
        pts.reserve(inst.mask->size());
        for (const auto& p : inst.mask->vertices()) {
            pts.push_back({p.x * width, p.y * height});
        }
    } else {
        const double x0 = inst.box.x0() * width, x1 = inst.box.x1() * width;
        const double y0 = inst.box.y0() * height, y1 = inst.box.y1() * height;
        pts = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
    }
    return pts;
}

std::vector<std::vector<Instance>> retile_annotations(std::span<const Instance> instances, const TileGrid& grid) {
    std::vector<std::vector<Instance>> out(grid.tiles.size());
    const double tile = grid.tile;
    for (const auto& inst : instances) {
        const auto outline = instance_outline_pixels(inst, grid.source_width, grid.source_height);
        const double full_area = core::polygon_area(outline);
        const double min_area = std::max(0.01 * full_area, 4.0);
        for (std::size_t i = 0; i < grid.tiles.size(); ++i) {
            const TileOffset off = grid.tiles[i];
            const double x0 = off.x, y0 = off.y;
            const double x1 = off.x + grid.content_width(i);
            const double y1 = off.y + grid.content_height(i);
            if (x1 <= x0 || y1 <= y0) {
                continue;
            }
            const auto clipped = core::clip_polygon(outline, x0, y0, x1, y1);
            if (clipped.size() < 3 || core::polygon_area(clipped) < min_area) {
                continue;
            }
            std::vector<Point2> local;
            local.reserve(clipped.size());
            double bx0 = tile, by0 = tile, bx1 = 0.0, by1 = 0.0;
            for (const auto& p : clipped) {
                const Point2 q{(p.x - x0) / tile, (p.y - y0) / tile};
                bx0 = std::min(bx0, q.x);
                by0 = std::min(by0, q.y);
                bx1 = std::max(bx1, q.x);
                by1 = std::max(by1, q.y);
                local.push_back(q);
            }
            Instance frag;
            frag.class_id = inst.class_id;
            if (inst.mask) {
                frag = Instance::from_polygon(inst.class_id, core::PolygonMask::make(std::move(local)));
            } else {
                frag.box = core::NormBox::from_edges(bx0, by0, bx1, by1);
            }
            out[i].push_back(std::move(frag));
        }
    }
    return out;
}

std::vector<Instance> stitch_annotations(const std::vector<std::vector<Instance>>& per_tile, const TileGrid& grid) {
    if (per_tile.size() != grid.tiles.size()) {
        throw std::invalid_argument("per-tile label list does not match the tile grid");
    }
    std::vector<Instance> out;
    const double w = grid.source_width, h = grid.source_height, tile = grid.tile;
    for (std::size_t i = 0; i < per_tile.size(); ++i) {
        const TileOffset off = grid.tiles[i];
        auto to_source = [&](const Point2& p) { return Point2{(off.x + p.x * tile) / w, (off.y + p.y * tile) / h}; };
        for (const auto& inst : per_tile[i]) {
            if (inst.mask) {
                std::vector<Point2> pts;
                for (const auto& p : inst.mask->vertices()) {
                    pts.push_back(to_source(p));
                }
                out.push_back(Instance::from_polygon(inst.class_id, core::PolygonMask::make(std::move(pts))));
            } else {
                const Point2 a = to_source({inst.box.x0(), inst.box.y0()});
                const Point2 b = to_source({inst.box.x1(), inst.box.y1()});
                Instance s;
                s.class_id = inst.class_id;
                s.box = core::NormBox::from_edges(a.x, a.y, b.x, b.y);
                out.push_back(std::move(s));
            }
        }
    }
    return out;
}

}  // namespace flakelens::dataset
