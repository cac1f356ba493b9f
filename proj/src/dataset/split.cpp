// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/dataset/split.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <regex>
#include <stdexcept>

namespace flakelens::dataset {

SplitManifest split_dataset(std::span<const SplitItem> items, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw std::invalid_argument("split ratio must be in (0, 1)");
    }
    if (items.empty()) {
        throw std::invalid_argument("cannot split an empty id list");
    }
    // Ordered map: the result must not depend on input order.
    std::map<std::string, std::vector<std::string>> groups;
    for (const auto& item : items) {
        groups[item.group].push_back(item.id);
    }
    if (groups.size() < 2) {
        throw std::invalid_argument("split needs at least 2 source groups, got " + std::to_string(groups.size()));
    }
    std::vector<const std::vector<std::string>*> order;
    order.reserve(groups.size());
    for (auto& [name, ids] : groups) {
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        order.push_back(&ids);
    }
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    std::size_t total = 0;
    for (const auto* g : order) {
        total += g->size();
    }
    const double target = ratio * static_cast<double>(total);
    std::vector<bool> to_train(order.size(), false);
    double train_items = 0.0;
    // A group goes to train when its midpoint still falls within the target.
    for (std::size_t i = 0; i < order.size(); ++i) {
        const double n = static_cast<double>(order[i]->size());
        if (train_items + n / 2.0 <= target) {
            to_train[i] = true;
            train_items += n;
        }
    }
    if (std::none_of(to_train.begin(), to_train.end(), [](bool b) { return b; })) {
        to_train.front() = true;
    }
    if (std::all_of(to_train.begin(), to_train.end(), [](bool b) { return b; })) {
        to_train.back() = false;
    }

    SplitManifest m;
    m.seed = seed;
    m.ratio = ratio;
    for (std::size_t i = 0; i < order.size(); ++i) {
        auto& side = to_train[i] ? m.train : m.val;
        side.insert(side.end(), order[i]->begin(), order[i]->end());
    }
    std::sort(m.train.begin(), m.train.end());
    std::sort(m.val.begin(), m.val.end());
    return m;
}

SplitManifest split_dataset(std::span<const std::string> ids, double ratio, std::uint64_t seed) {
    std::vector<SplitItem> items;
    items.reserve(ids.size());
    for (const auto& id : ids) {
        items.push_back({id, source_id_of(id)});
    }
    return split_dataset(items, ratio, seed);
}

std::string source_id_of(std::string_view example_id) {
    static const std::regex kSuffix(R"(^(.*?)(_x\d+_y\d+)?(_aug\d+.*)?$)");
    std::match_results<std::string_view::const_iterator> m;
    if (std::regex_match(example_id.begin(), example_id.end(), m, kSuffix) && m[1].length() > 0) {
        return m[1].str();
    }
    return std::string(example_id);
}

nlohmann::json to_json(const SplitManifest& m) {
    return {{"train", m.train}, {"val", m.val}, {"seed", m.seed}, {"ratio", m.ratio}};
}

SplitManifest split_from_json(const nlohmann::json& j) {
    SplitManifest m;
    m.train = j.at("train").get<std::vector<std::string>>();
    m.val = j.at("val").get<std::vector<std::string>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.ratio = j.at("ratio").get<double>();
    return m;
}

void save_split(const SplitManifest& m, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write split manifest " + path.string());
    }
    out << to_json(m).dump(2) << '\n';
}

SplitManifest load_split(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot read split manifest " + path.string());
    }
    return split_from_json(nlohmann::json::parse(in));
}

}  // namespace flakelens::dataset
