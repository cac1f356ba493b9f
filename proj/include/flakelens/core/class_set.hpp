// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flakelens::core {

/// Ordered, unique class names; a class id is the position in the list.
class ClassSet {
public:
    /// Throws std::invalid_argument when empty, when a name is empty or repeated.
    explicit ClassSet(std::vector<std::string> names);

    std::size_t size() const noexcept { return names_.size(); }
    const std::string& name(int id) const;
    std::optional<int> id_of(std::string_view name) const noexcept;
    bool contains(int id) const noexcept { return id >= 0 && static_cast<std::size_t>(id) < names_.size(); }
    const std::vector<std::string>& names() const noexcept { return names_; }

    /// Parses "a,b,c" (whitespace around names is trimmed).
    static ClassSet from_csv(std::string_view csv);

    friend bool operator==(const ClassSet&, const ClassSet&) = default;

private:
    std::vector<std::string> names_;
};

}  // namespace flakelens::core
