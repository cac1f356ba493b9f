// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/core/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <opencv2/imgproc.hpp>

namespace flakelens::core {

namespace {

void check_dims(int width, int height) {
    if (width < 1 || height < 1) {
        throw std::invalid_argument("image dimensions must be positive, got " + std::to_string(width) + "x" +
                                    std::to_string(height));
    }
}

}  // namespace

ImageBuffer::ImageBuffer(int width, int height) : width_(width), height_(height) {
    check_dims(width, height);
    data_.assign(pixel_count() * kChannels, 0);
}

ImageBuffer::ImageBuffer(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
    check_dims(width, height);
    if (data_.size() != pixel_count() * kChannels) {
        throw std::invalid_argument("image data holds " + std::to_string(data_.size()) + " bytes, expected " +
                                    std::to_string(pixel_count() * kChannels));
    }
}

ImageBuffer ImageBuffer::filled(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    ImageBuffer img(width, height);
    auto bytes = img.data();
    for (std::size_t i = 0; i < bytes.size(); i += 3) {
        bytes[i] = r;
        bytes[i + 1] = g;
        bytes[i + 2] = b;
    }
    return img;
}

ImageBuffer resize_bilinear(const ImageBuffer& src, int width, int height) {
    check_dims(width, height);
    if (src.width() == width && src.height() == height) {
        return src;
    }
    // OpenCV's INTER_LINEAR uses the same half-pixel centers and edge clamping.
    ImageBuffer out(width, height);
    const cv::Mat in(src.height(), src.width(), CV_8UC3, const_cast<std::uint8_t*>(src.data().data()));
    cv::Mat dst(height, width, CV_8UC3, out.data().data());
    cv::resize(in, dst, dst.size(), 0, 0, cv::INTER_LINEAR);
    return out;
}

ImageBuffer resize_nearest(const ImageBuffer& src, int width, int height) {
    check_dims(width, height);
    ImageBuffer out(width, height);
    std::vector<int> xs(static_cast<std::size_t>(width));
    for (int x = 0; x < width; ++x) {
        xs[static_cast<std::size_t>(x)] =
            std::min(src.width() - 1, static_cast<int>((x + 0.5) * src.width() / width));
    }
    for (int y = 0; y < height; ++y) {
        const int sy = std::min(src.height() - 1, static_cast<int>((y + 0.5) * src.height() / height));
        const auto in = src.row(sy);
        auto dst = out.row(y);
        for (int x = 0; x < width; ++x) {
            const std::size_t s = static_cast<std::size_t>(xs[static_cast<std::size_t>(x)]) * 3;
            const std::size_t d = static_cast<std::size_t>(x) * 3;
            dst[d] = in[s];
            dst[d + 1] = in[s + 1];
            dst[d + 2] = in[s + 2];
        }
    }
    return out;
}

}  // namespace flakelens::core
