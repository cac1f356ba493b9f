// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/infer/letterbox.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

namespace flakelens::infer {

using core::ImageBuffer;
using core::PixelBox;

namespace {

int resized_extent(int source, double scale, int target) {
    return std::clamp(static_cast<int>(std::lround(source * scale)), 1, target);
}

}  // namespace

PixelBox LetterboxTransform::to_letterbox(const PixelBox& b) const noexcept {
    return {b.x0 * scale + pad_x, b.y0 * scale + pad_y, b.x1 * scale + pad_x, b.y1 * scale + pad_y};
}

PixelBox LetterboxTransform::to_source(const PixelBox& b) const noexcept {
    return {(b.x0 - pad_x) / scale, (b.y0 - pad_y) / scale, (b.x1 - pad_x) / scale, (b.y1 - pad_y) / scale};
}

LetterboxTransform make_letterbox_transform(int source_width, int source_height, int target) {
    if (target <= 0 || target % 32 != 0) {
        throw std::invalid_argument("letterbox target must be a positive multiple of 32, got " +
                                    std::to_string(target));
    }
    if (source_width < 1 || source_height < 1) {
        throw std::invalid_argument("letterbox source must be non-empty");
    }
    LetterboxTransform t;
    t.source_width = source_width;
    t.source_height = source_height;
    t.target = target;
    t.scale = std::min(static_cast<double>(target) / source_width, static_cast<double>(target) / source_height);
    const int new_w = resized_extent(source_width, t.scale, target);
    const int new_h = resized_extent(source_height, t.scale, target);
    t.pad_x = (target - new_w) / 2;
    t.pad_y = (target - new_h) / 2;
    return t;
}

Letterboxed letterbox(const ImageBuffer& img, int target) {
    const LetterboxTransform t = make_letterbox_transform(img.width(), img.height(), target);
    const int new_w = resized_extent(img.width(), t.scale, target);
    const int new_h = resized_extent(img.height(), t.scale, target);
    ImageBuffer canvas = ImageBuffer::filled(target, target, kLetterboxFill, kLetterboxFill, kLetterboxFill);
    const ImageBuffer resized = core::resize_bilinear(img, new_w, new_h);
    for (int y = 0; y < new_h; ++y) {
        std::memcpy(canvas.row(y + t.pad_y).data() + static_cast<std::size_t>(t.pad_x) * 3, resized.row(y).data(),
                    static_cast<std::size_t>(new_w) * 3);
    }
    return {std::move(canvas), t};
}

Tensor to_input_tensor(const ImageBuffer& img, double pixel_norm) {
    const std::int64_t w = img.width(), h = img.height();
    Tensor t({1, 3, h, w});
    const auto norm = static_cast<float>(pixel_norm);
    const std::size_t plane = static_cast<std::size_t>(w * h);
    const auto src = img.data();
    for (std::size_t i = 0; i < plane; ++i) {
        t.values[i] = src[i * 3] * norm;
        t.values[plane + i] = src[i * 3 + 1] * norm;
        t.values[2 * plane + i] = src[i * 3 + 2] * norm;
    }
    return t;
}

}  // namespace flakelens::infer
