// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace flakelens::dataset {

struct SplitItem {
    std::string id;
    /// Items sharing a group (normally the source image) always land on the same side.
    std::string group;
};

struct SplitManifest {
    std::vector<std::string> train;
    std::vector<std::string> val;
    std::uint64_t seed = 0;
    double ratio = 0.8;

    friend bool operator==(const SplitManifest&, const SplitManifest&) = default;
};

/// Group-aware shuffled split. Throws std::invalid_argument for ratio outside
/// (0, 1), empty input or fewer than two groups.
SplitManifest split_dataset(std::span<const SplitItem> items, double ratio, std::uint64_t seed);
/// Groups ids by source_id_of().
SplitManifest split_dataset(std::span<const std::string> ids, double ratio, std::uint64_t seed);

/// Strips a trailing tile suffix "_x<N>_y<N>" (and any "_aug..." suffix after it).
std::string source_id_of(std::string_view example_id);

nlohmann::json to_json(const SplitManifest& m);
SplitManifest split_from_json(const nlohmann::json& j);
void save_split(const SplitManifest& m, const std::filesystem::path& path);
SplitManifest load_split(const std::filesystem::path& path);

}  // namespace flakelens::dataset
