// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "flakelens/infer/detector.hpp"
#include "flakelens/robust/perturb.hpp"

namespace flakelens::rtserve {

struct OverlayOptions {
    bool boxes = true;
    bool masks = true;
    bool labels = true;
    bool confidences = true;

    friend bool operator==(const OverlayOptions&, const OverlayOptions&) = default;
};

struct LiveConfig {
    std::string model_id;
    double confidence = 0.25;
    double iou = 0.45;
    /// Empty means all classes.
    std::vector<int> enabled_classes;
    std::optional<robust::Perturbation> perturbation;
    OverlayOptions overlay;
    /// Stamped by ConfigStore; increases with every accepted change.
    std::uint64_t version = 0;
};

nlohmann::json to_json(const LiveConfig& c);

struct FieldError {
    std::string field;
    std::string message;
};

/// Loaded models by manifest id. Immutable after construction.
class ModelRegistry {
public:
    struct Entry {
        infer::ModelManifest manifest;
        std::shared_ptr<infer::Detector> detector;
    };

    /// Throws std::invalid_argument for an empty list or duplicate ids.
    explicit ModelRegistry(std::vector<Entry> entries);
    /// Builds detectors for each manifest.
    static ModelRegistry load(const std::vector<infer::ModelManifest>& manifests);

    const Entry* find(const std::string& id) const noexcept;
    const std::vector<Entry>& entries() const noexcept { return entries_; }
    nlohmann::json to_json() const;

private:
    std::vector<Entry> entries_;
};

/// Versioned LiveConfig, replaced atomically. Readers get an immutable snapshot.
class ConfigStore {
public:
    /// Initial config: first model, its manifest defaults.
    explicit ConfigStore(const ModelRegistry& models);

    std::shared_ptr<const LiveConfig> current() const;

    /// Applies a partial update (fields absent from `patch` keep their value).
    /// Returns the new config, or every field error with the config unchanged.
    std::variant<std::shared_ptr<const LiveConfig>, std::vector<FieldError>> update(const nlohmann::json& patch);

private:
    const ModelRegistry& models_;
    mutable std::mutex mutex_;
    std::shared_ptr<const LiveConfig> current_;
};

}  // namespace flakelens::rtserve
