// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "json_config.hpp"

namespace flakelens::cli {

using nlohmann::json;

std::string JsonConfig::to_config(const CLI::App* app, bool default_also, bool, std::string) const {
    json j = json::object();
    for (const CLI::Option* opt : app->get_options({})) {
        if (!opt->get_configurable() || opt->get_lnames().empty()) continue;
        const std::string name = opt->get_lnames()[0];
        if (opt->count() > 0) {
            const auto& results = opt->results();
            if (opt->get_type_size() == 0) {
                j[name] = true;
            } else if (results.size() == 1) {
                j[name] = results[0];
            } else {
                j[name] = results;
            }
        } else if (default_also && !opt->get_default_str().empty()) {
            j[name] = opt->get_default_str();
        }
    }
    for (const CLI::App* sub : app->get_subcommands({})) {
        const json child = json::parse(to_config(sub, default_also, false, ""));
        if (!child.empty()) j[sub->get_name()] = child;
    }
    return j.dump(2);
}

std::vector<CLI::ConfigItem> JsonConfig::from_config(std::istream& input) const {
    json j;
    try {
        input >> j;
    } catch (const json::exception& e) {
        throw CLI::ConversionError("config file is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    return flatten(j, {});
}

std::vector<CLI::ConfigItem> JsonConfig::flatten(const json& j, const std::vector<std::string>& parents) {
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
        if (value.is_object()) {
            auto path = parents;
            path.push_back(key);
            auto nested = flatten(value, path);
            items.insert(items.end(), nested.begin(), nested.end());
            continue;
        }
        CLI::ConfigItem item;
        item.parents = parents;
        item.name = key;
        auto scalar = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
        if (value.is_array()) {
            for (const auto& v : value) item.inputs.push_back(scalar(v));
        } else if (value.is_boolean()) {
            item.inputs = {value.get<bool>() ? "true" : "false"};
        } else {
            item.inputs = {scalar(value)};
        }
        items.push_back(std::move(item));
    }
    return items;
}

}  // namespace flakelens::cli
