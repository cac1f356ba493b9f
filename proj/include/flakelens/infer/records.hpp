// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "flakelens/core/bitmask.hpp"
#include "flakelens/core/class_set.hpp"
#include "flakelens/core/instance.hpp"

namespace flakelens::infer {

/// Row-major run-length encoding: {"width", "height", "counts"} where counts
/// alternate unset/set runs, starting with an unset run (possibly 0).
nlohmann::json encode_rle(const core::BitMask& mask);
core::BitMask decode_rle(const nlohmann::json& j);

/// {"class_name", "class_id", "confidence", "box": [x0, y0, x1, y1], "mask"?}
nlohmann::json detection_record(const core::Detection& det, const core::ClassSet& classes, bool include_mask);
/// Inverse of detection_record. Class is resolved by name when the set knows it.
core::Detection detection_from_record(const nlohmann::json& j, const core::ClassSet& classes);

/// Per-image prediction file written by `infer`.
struct PredictionFile {
    std::string image;
    int width = 0;
    int height = 0;
    std::vector<core::Detection> detections;
};

nlohmann::json to_json(const PredictionFile& p, const core::ClassSet& classes, bool include_masks = true);
PredictionFile prediction_from_json(const nlohmann::json& j, const core::ClassSet& classes);
void save_prediction(const PredictionFile& p, const core::ClassSet& classes, const std::filesystem::path& path);
PredictionFile load_prediction(const std::filesystem::path& path, const core::ClassSet& classes);

/// Rounds to a fixed number of decimals for serialization.
double round_to(double v, int decimals) noexcept;

}  // namespace flakelens::infer
