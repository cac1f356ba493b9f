// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "flakelens/core/class_set.hpp"
#include "flakelens/core/instance.hpp"

namespace flakelens::quantify {

enum class AreaBasis { mask, box };

std::string_view to_string(AreaBasis b) noexcept;
AreaBasis parse_basis(std::string_view s);

struct ClassMorphology {
    std::string name;
    std::size_t count = 0;
    /// Pixels covered by the union of the class's regions.
    std::size_t area_px = 0;
    /// Sum of per-instance areas, for the mean.
    std::size_t instance_area_sum = 0;
    /// area_px / analyzed_px.
    double fraction = 0.0;

    double mean_instance_area() const noexcept {
        return count ? static_cast<double>(instance_area_sum) / static_cast<double>(count) : 0.0;
    }
};

struct MorphologyReport {
    AreaBasis basis = AreaBasis::mask;
    /// Set when mask basis was requested but a detection had no mask.
    bool fell_back_to_box = false;
    /// Image area minus padding, summed over every accumulated image.
    std::size_t analyzed_px = 0;
    std::size_t images = 0;
    std::vector<ClassMorphology> classes;
};

/// Per-class union areas as a fraction of (width * height - padded_px).
/// Masks must be width x height. Throws std::invalid_argument on bad dims
/// or an unknown class id.
MorphologyReport area_fractions(std::span<const core::Detection> dets, int width, int height,
                                const core::ClassSet& classes, AreaBasis basis = AreaBasis::mask,
                                std::size_t padded_px = 0);

/// Adds `more` into `total` (same classes and basis); fractions are recomputed
/// from the summed areas.
void accumulate(MorphologyReport& total, const MorphologyReport& more);

std::vector<long> instance_counts(std::span<const core::Detection> dets, std::size_t num_classes);
/// after - before, per class.
std::vector<long> count_deltas(std::span<const long> before, std::span<const long> after);
/// "{bulk:+3, thin:+1}" in class order, zero deltas omitted.
std::string format_deltas(std::span<const long> deltas, const core::ClassSet& classes);

/// Percentage with two decimals, ties rounded to even: 0.176 -> "17.60%".
std::string format_percent(double fraction);

/// Header line, then per class with detections "name: XX.XX%", "name.count: n"
/// and "name.mean_area_px: a". An empty report is the header alone.
std::string format_report(const MorphologyReport& r);
nlohmann::json to_json(const MorphologyReport& r);
/// Throws std::runtime_error naming the path on I/O failure.
void emit_report(const MorphologyReport& r, const std::filesystem::path& dest);

}  // namespace flakelens::quantify
