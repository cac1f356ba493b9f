// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "flakelens/core/geometry.hpp"

namespace flakelens::core {

/// One bit per pixel, row-major.
class BitMask {
public:
    BitMask() = default;
    /// All bits clear. Throws std::invalid_argument for negative dimensions.
    BitMask(int width, int height);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t bit_count() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }

    bool get(int x, int y) const noexcept {
        const std::size_t i = index(x, y);
        return (words_[i >> 6] >> (i & 63)) & 1u;
    }
    void set(int x, int y, bool value = true) noexcept {
        const std::size_t i = index(x, y);
        const std::uint64_t bit = std::uint64_t{1} << (i & 63);
        if (value) {
            words_[i >> 6] |= bit;
        } else {
            words_[i >> 6] &= ~bit;
        }
    }
    /// Sets bits [x_begin, x_end) of row y.
    void set_span(int y, int x_begin, int x_end) noexcept;

    std::size_t popcount() const noexcept;
    bool any() const noexcept;

    /// Throw std::invalid_argument on dimension mismatch.
    std::size_t and_count(const BitMask& other) const;
    std::size_t or_count(const BitMask& other) const;
    void merge(const BitMask& other);

    /// Bounding rectangle of set bits as a pixel box; nullopt-like invalid box when empty.
    PixelBox bounds() const noexcept;

    friend bool operator==(const BitMask&, const BitMask&) = default;

private:
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }
    void check_same_shape(const BitMask& other) const;

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint64_t> words_;
};

/// Even-odd fill; a pixel is set iff its center lies inside the polygon.
BitMask rasterize(const PolygonMask& poly, int width, int height);
/// Same rule for a polygon already expressed in pixel units.
BitMask rasterize_pixels(std::span<const Point2> pts, int width, int height);
/// A pixel is set iff its center lies in [x0, x1) x [y0, y1).
BitMask rasterize_box(const PixelBox& box, int width, int height);

/// |a AND b| / |a OR b|; 0 when both are empty. Throws on dimension mismatch.
double iou_mask(const BitMask& a, const BitMask& b);

}  // namespace flakelens::core
