// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/core/class_set.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace flakelens::core {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

}  // namespace

ClassSet::ClassSet(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.empty()) {
        throw std::invalid_argument("class set must not be empty");
    }
    std::unordered_set<std::string> seen;
    for (const auto& n : names_) {
        if (n.empty()) {
            throw std::invalid_argument("class names must not be empty");
        }
        if (!seen.insert(n).second) {
            throw std::invalid_argument("duplicate class name '" + n + "'");
        }
    }
}

const std::string& ClassSet::name(int id) const {
    if (!contains(id)) {
        throw std::out_of_range("class id " + std::to_string(id) + " outside class set of size " +
                                std::to_string(names_.size()));
    }
    return names_[static_cast<std::size_t>(id)];
}

std::optional<int> ClassSet::id_of(std::string_view name) const noexcept {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) {
        return std::nullopt;
    }
    return static_cast<int>(it - names_.begin());
}

ClassSet ClassSet::from_csv(std::string_view csv) {
    std::vector<std::string> names;
    std::size_t start = 0;
    while (start <= csv.size()) {
        const std::size_t comma = csv.find(',', start);
        const std::size_t end = comma == std::string_view::npos ? csv.size() : comma;
        names.emplace_back(trim(csv.substr(start, end - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return ClassSet(std::move(names));
}

}  // namespace flakelens::core
