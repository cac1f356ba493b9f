// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <CLI11.hpp>
#include <json.hpp>

namespace flakelens::cli {

/// --config files as JSON: {"eval": {"range-end": 95}, "seed": 3}. Objects map
/// to subcommands, scalars and arrays to flags of the same long name.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override;
    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override;

private:
    static std::vector<CLI::ConfigItem> flatten(const nlohmann::json& j, const std::vector<std::string>& parents);
};

}  // namespace flakelens::cli
