// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "flakelens/core/image.hpp"

namespace flakelens::core {

class ImageIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Decodes any format OpenCV understands; grayscale and alpha inputs become RGB.
ImageBuffer load_image(const std::filesystem::path& path);
void save_image(const ImageBuffer& img, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_jpeg(const ImageBuffer& img, int quality = 85);
ImageBuffer decode_image(const std::vector<std::uint8_t>& bytes);

bool is_image_file(const std::filesystem::path& path);
/// Image files directly inside `dir`, sorted by name.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

}  // namespace flakelens::core
