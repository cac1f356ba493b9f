// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "flakelens/core/class_set.hpp"
#include "flakelens/core/instance.hpp"

namespace flakelens::dataset {

/// Error in a YOLO label file; carries the 1-based line number.
class LabelParseError : public std::runtime_error {
public:
    LabelParseError(int line, const std::string& message, const std::string& source = {});
    int line() const noexcept { return line_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    int line_;
    std::string detail_;
};

/// Parses YOLO text labels. Each non-empty line is either
///   cls cx cy w h            (detection)
///   cls x1 y1 ... xn yn      (segmentation, n >= 3)
std::vector<core::Instance> parse_label_file(std::string_view text, const core::ClassSet& classes);

/// Inverse of parse_label_file; coordinates printed with 6 decimals, one
/// newline-terminated line per instance. Polygon instances are written as
/// segmentation lines.
std::string write_label_file(std::span<const core::Instance> instances);

std::vector<core::Instance> read_label_path(const std::filesystem::path& path, const core::ClassSet& classes);
void write_label_path(const std::filesystem::path& path, std::span<const core::Instance> instances);

}  // namespace flakelens::dataset
