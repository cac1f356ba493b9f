// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/dataset/layout.hpp"

#include <algorithm>
#include <fstream>

#include "flakelens/core/image_io.hpp"

namespace flakelens::dataset {

void DatasetLayout::create() const {
    std::filesystem::create_directories(images_dir());
    std::filesystem::create_directories(labels_dir());
}

std::optional<core::ClassSet> DatasetLayout::read_classes() const {
    std::ifstream in(classes_path());
    if (!in) {
        return std::nullopt;
    }
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
            line.pop_back();
        }
        if (!line.empty()) {
            names.push_back(line);
        }
    }
    return core::ClassSet(std::move(names));
}

void DatasetLayout::write_classes(const core::ClassSet& classes) const {
    std::ofstream out(classes_path());
    for (const auto& n : classes.names()) {
        out << n << '\n';
    }
}

std::vector<std::string> DatasetLayout::example_ids() const {
    std::vector<std::string> ids;
    if (!std::filesystem::is_directory(images_dir())) {
        return ids;
    }
    for (const auto& p : core::list_images(images_dir())) {
        ids.push_back(p.stem().string());
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

}  // namespace flakelens::dataset
