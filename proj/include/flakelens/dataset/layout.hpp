// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "flakelens/core/class_set.hpp"

namespace flakelens::dataset {

/// On-disk dataset: <root>/images, <root>/labels (same base names, ".txt"),
/// <root>/split.json and an optional <root>/classes.txt (one name per line).
struct DatasetLayout {
    std::filesystem::path root;

    std::filesystem::path images_dir() const { return root / "images"; }
    std::filesystem::path labels_dir() const { return root / "labels"; }
    std::filesystem::path split_path() const { return root / "split.json"; }
    std::filesystem::path classes_path() const { return root / "classes.txt"; }
    std::filesystem::path label_for(const std::filesystem::path& image) const {
        return labels_dir() / (image.stem().string() + ".txt");
    }

    void create() const;
    std::optional<core::ClassSet> read_classes() const;
    void write_classes(const core::ClassSet& classes) const;
    /// Example ids (image stems), sorted.
    std::vector<std::string> example_ids() const;
};

}  // namespace flakelens::dataset
