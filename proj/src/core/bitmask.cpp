// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/core/bitmask.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace flakelens::core {

BitMask::BitMask(int width, int height) : width_(width), height_(height) {
    if (width < 0 || height < 0) {
        throw std::invalid_argument("bitmask dimensions must be non-negative");
    }
    words_.assign((bit_count() + 63) / 64, 0);
}

void BitMask::set_span(int y, int x_begin, int x_end) noexcept {
    x_begin = std::max(x_begin, 0);
    x_end = std::min(x_end, width_);
    if (x_begin >= x_end || y < 0 || y >= height_) {
        return;
    }
    std::size_t i = index(x_begin, y);
    const std::size_t end = index(x_end - 1, y) + 1;
    while (i < end && (i & 63) != 0) {
        words_[i >> 6] |= std::uint64_t{1} << (i & 63);
        ++i;
    }
    while (i + 64 <= end) {
        words_[i >> 6] = ~std::uint64_t{0};
        i += 64;
    }
    while (i < end) {
        words_[i >> 6] |= std::uint64_t{1} << (i & 63);
        ++i;
    }
}

std::size_t BitMask::popcount() const noexcept {
    std::size_t n = 0;
    for (auto w : words_) {
        n += static_cast<std::size_t>(std::popcount(w));
    }
    return n;
}

bool BitMask::any() const noexcept {
    return std::any_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w != 0; });
}

void BitMask::check_same_shape(const BitMask& other) const {
    if (width_ != other.width_ || height_ != other.height_) {
        throw std::invalid_argument("bitmask dimension mismatch: " + std::to_string(width_) + "x" +
                                    std::to_string(height_) + " vs " + std::to_string(other.width_) + "x" +
                                    std::to_string(other.height_));
    }
}

std::size_t BitMask::and_count(const BitMask& other) const {
    check_same_shape(other);
    std::size_t n = 0;
    for (std::size_t i = 0; i < words_.size(); ++i) {
        n += static_cast<std::size_t>(std::popcount(words_[i] & other.words_[i]));
    }
    return n;
}

std::size_t BitMask::or_count(const BitMask& other) const {
    check_same_shape(other);
    std::size_t n = 0;
    for (std::size_t i = 0; i < words_.size(); ++i) {
        n += static_cast<std::size_t>(std::popcount(words_[i] | other.words_[i]));
    }
    return n;
}

void BitMask::merge(const BitMask& other) {
    check_same_shape(other);
    for (std::size_t i = 0; i < words_.size(); ++i) {
        words_[i] |= other.words_[i];
    }
}

PixelBox BitMask::bounds() const noexcept {
    int x0 = width_, y0 = height_, x1 = -1, y1 = -1;
    if (width_ == 0) {
        return {};
    }
    const auto w = static_cast<std::size_t>(width_);
    for (std::size_t k = 0; k < words_.size(); ++k) {
        std::uint64_t word = words_[k];
        if (word == 0) {
            continue;
        }
        // Split the word at row boundaries; first/last set bit of each piece give its x extent.
        std::size_t bit = k * 64;
        while (word != 0) {
            const std::size_t row = bit / w;
            const std::size_t row_end = (row + 1) * w;
            const std::size_t span = std::min<std::size_t>(row_end - bit, 64 - (bit - k * 64));
            const std::uint64_t piece_mask = span == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << span) - 1;
            const std::uint64_t piece = word & piece_mask;
            if (piece != 0) {
                const std::size_t first = bit + static_cast<std::size_t>(std::countr_zero(piece));
                const std::size_t last = bit + 63 - static_cast<std::size_t>(std::countl_zero(piece));
                x0 = std::min(x0, static_cast<int>(first - row * w));
                x1 = std::max(x1, static_cast<int>(last - row * w));
                y0 = std::min(y0, static_cast<int>(row));
                y1 = std::max(y1, static_cast<int>(row));
            }
            word = span == 64 ? 0 : word >> span;
            bit += span;
        }
    }
    if (x1 < 0) {
        return {};
    }
    return {static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(x1 + 1),
            static_cast<double>(y1 + 1)};
}

BitMask rasterize_pixels(std::span<const Point2> pts, int width, int height) {
    if (width < 1 || height < 1) {
        throw std::invalid_argument("rasterize needs positive dimensions");
    }
    BitMask mask(width, height);
    if (pts.size() < 3) {
        return mask;
    }
    double ymin = pts[0].y, ymax = pts[0].y;
    for (const auto& p : pts) {
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    const int row_begin = std::max(0, static_cast<int>(std::floor(ymin - 0.5)));
    const int row_end = std::min(height, static_cast<int>(std::ceil(ymax + 0.5)));
    std::vector<double> xs;
    for (int row = row_begin; row < row_end; ++row) {
        const double yc = row + 0.5;
        xs.clear();
        for (std::size_t i = 0, j = pts.size() - 1; i < pts.size(); j = i++) {
            const Point2& a = pts[j];
            const Point2& b = pts[i];
            // Half-open rule: an edge spans the scanline when exactly one endpoint is above it.
            if ((a.y <= yc) != (b.y <= yc)) {
                xs.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
            }
        }
        std::sort(xs.begin(), xs.end());
        for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
            // Centers xc = col + 0.5 with xs[k] <= xc < xs[k + 1].
            const int first = static_cast<int>(std::ceil(xs[k] - 0.5));
            const int last = static_cast<int>(std::ceil(xs[k + 1] - 0.5));
            mask.set_span(row, first, last);
        }
    }
    return mask;
}

BitMask rasterize(const PolygonMask& poly, int width, int height) {
    std::vector<Point2> pts;
    pts.reserve(poly.size());
    for (const auto& p : poly.vertices()) {
        pts.push_back({p.x * width, p.y * height});
    }
    return rasterize_pixels(pts, width, height);
}

BitMask rasterize_box(const PixelBox& box, int width, int height) {
    if (width < 1 || height < 1) {
        throw std::invalid_argument("rasterize needs positive dimensions");
    }
    BitMask mask(width, height);
    if (!box.valid()) {
        return mask;
    }
    const int c0 = static_cast<int>(std::ceil(box.x0 - 0.5));
    const int c1 = static_cast<int>(std::ceil(box.x1 - 0.5));
    const int r0 = std::max(0, static_cast<int>(std::ceil(box.y0 - 0.5)));
    const int r1 = std::min(height, static_cast<int>(std::ceil(box.y1 - 0.5)));
    for (int r = r0; r < r1; ++r) {
        mask.set_span(r, c0, c1);
    }
    return mask;
}

double iou_mask(const BitMask& a, const BitMask& b) {
    const std::size_t uni = a.or_count(b);
    if (uni == 0) {
        return 0.0;
    }
    return static_cast<double>(a.and_count(b)) / static_cast<double>(uni);
}

}  // namespace flakelens::core
