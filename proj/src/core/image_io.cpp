// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/core/image_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstring>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace flakelens::core {

namespace {

ImageBuffer from_mat(const cv::Mat& decoded) {
    cv::Mat rgb;
    switch (decoded.channels()) {
        case 1:
            cv::cvtColor(decoded, rgb, cv::COLOR_GRAY2RGB);
            break;
        case 4:
            cv::cvtColor(decoded, rgb, cv::COLOR_BGRA2RGB);
            break;
        default:
            cv::cvtColor(decoded, rgb, cv::COLOR_BGR2RGB);
            break;
    }
    if (rgb.depth() != CV_8U) {
        rgb.convertTo(rgb, CV_8U, rgb.depth() == CV_16U ? 1.0 / 257.0 : 1.0);
    }
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(rgb.total()) * 3);
    if (rgb.isContinuous()) {
        std::memcpy(bytes.data(), rgb.data, bytes.size());
    } else {
        for (int y = 0; y < rgb.rows; ++y) {
            std::memcpy(bytes.data() + static_cast<std::size_t>(y) * rgb.cols * 3, rgb.ptr(y),
                        static_cast<std::size_t>(rgb.cols) * 3);
        }
    }
    return ImageBuffer(rgb.cols, rgb.rows, std::move(bytes));
}

cv::Mat to_bgr(const ImageBuffer& img) {
    // cv::Mat over const data; cvtColor writes into a fresh matrix.
    const cv::Mat rgb(img.height(), img.width(), CV_8UC3, const_cast<std::uint8_t*>(img.data().data()));
    cv::Mat bgr;
    cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
    return bgr;
}

}  // namespace

ImageBuffer load_image(const std::filesystem::path& path) {
    const cv::Mat decoded = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    if (decoded.empty()) {
        throw ImageIoError("cannot decode image " + path.string());
    }
    return from_mat(decoded);
}

void save_image(const ImageBuffer& img, const std::filesystem::path& path) {
    if (!cv::imwrite(path.string(), to_bgr(img))) {
        throw ImageIoError("cannot write image " + path.string());
    }
}

std::vector<std::uint8_t> encode_jpeg(const ImageBuffer& img, int quality) {
    std::vector<std::uint8_t> out;
    if (!cv::imencode(".jpg", to_bgr(img), out, {cv::IMWRITE_JPEG_QUALITY, quality})) {
        throw ImageIoError("jpeg encoding failed");
    }
    return out;
}

ImageBuffer decode_image(const std::vector<std::uint8_t>& bytes) {
    const cv::Mat decoded = cv::imdecode(bytes, cv::IMREAD_UNCHANGED);
    if (decoded.empty()) {
        throw ImageIoError("cannot decode image bytes");
    }
    return from_mat(decoded);
}

bool is_image_file(const std::filesystem::path& path) {
    static constexpr std::array<std::string_view, 7> kExt = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff", ".webp"};
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return std::find(kExt.begin(), kExt.end(), ext) != kExt.end();
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && is_image_file(entry.path())) {
            out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace flakelens::core
