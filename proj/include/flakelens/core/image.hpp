// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace flakelens::core {

/// Owned row-major RGB8 raster. Channel order is always R, G, B.
class ImageBuffer {
public:
    static constexpr int kChannels = 3;

    ImageBuffer() = default;
    /// Zero-filled image. Throws std::invalid_argument for non-positive dimensions.
    ImageBuffer(int width, int height);
    /// Takes ownership of `data`, which must hold exactly width * height * 3 bytes.
    ImageBuffer(int width, int height, std::vector<std::uint8_t> data);

    static ImageBuffer filled(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return data_.empty(); }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }

    std::span<const std::uint8_t> data() const noexcept { return data_; }
    std::span<std::uint8_t> data() noexcept { return data_; }

    std::uint8_t at(int x, int y, int c) const noexcept { return data_[offset(x, y) + c]; }
    std::uint8_t& at(int x, int y, int c) noexcept { return data_[offset(x, y) + c]; }

    std::span<const std::uint8_t> row(int y) const noexcept {
        return {data_.data() + offset(0, y), static_cast<std::size_t>(width_) * kChannels};
    }
    std::span<std::uint8_t> row(int y) noexcept {
        return {data_.data() + offset(0, y), static_cast<std::size_t>(width_) * kChannels};
    }

    friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

private:
    std::size_t offset(int x, int y) const noexcept {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) *
               kChannels;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Bilinear resize with half-pixel centers, results rounded to nearest.
ImageBuffer resize_bilinear(const ImageBuffer& src, int width, int height);

/// Nearest-neighbour resize using pixel-center sampling.
ImageBuffer resize_nearest(const ImageBuffer& src, int width, int height);

}  // namespace flakelens::core
