// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "flakelens/core/class_set.hpp"
#include "flakelens/infer/tensor.hpp"

namespace flakelens::infer {

enum class Task { detect, segment };

enum class Slot { box, scores, coefficients };

struct TensorSpec {
    std::string name;
    Shape shape;
};

/// Describes how the exported network lays out its outputs.
///
/// The prediction tensor is [1, C, N] when `anchors_last` (the usual YOLO
/// export) and [1, N, C] otherwise, where each of the N candidates carries C
/// values arranged in `slots` order: 4 box values, one score per class and,
/// for segmentation, `num_coefficients` mask coefficients.
struct OutputLayout {
    std::string input = "images";
    std::vector<TensorSpec> outputs;
    std::string predictions;
    std::optional<std::string> prototypes;
    bool anchors_last = true;
    std::vector<Slot> slots = {Slot::box, Slot::scores, Slot::coefficients};
    /// "cxcywh" or "xyxy", in letterboxed input pixels.
    std::string box_format = "cxcywh";
    int num_coefficients = 0;
    /// Sigmoid is applied to class scores when true.
    bool scores_are_logits = false;

    const TensorSpec& output(const std::string& name) const;
    std::int64_t candidate_count() const;
    std::int64_t channel_count() const;
    /// Offset of a slot within one candidate's channel vector.
    int slot_offset(Slot slot, int num_classes) const;
};

struct ModelManifest {
    /// Manifest file stem; identifies the model in services.
    std::string id;
    /// Absolute path, or "stub:<scenario>[@<latency ms>]" for the built-in test double.
    std::string model_path;
    Task task = Task::detect;
    int input_size = 640;
    core::ClassSet class_set{{"object"}};
    OutputLayout layout;
    double pixel_norm = 1.0 / 255.0;
    double default_confidence = 0.25;
    double default_iou = 0.45;

    /// Throws ManifestError on any broken invariant.
    void validate() const;
    Shape input_shape() const { return {1, 3, input_size, input_size}; }
};

/// Parses a manifest; relative model paths resolve against `base_dir`.
/// Unknown keys are rejected.
ModelManifest parse_manifest(const nlohmann::json& j, const std::filesystem::path& base_dir, std::string id);
ModelManifest load_manifest(const std::filesystem::path& path);
nlohmann::json to_json(const ModelManifest& m);

/// All "*.manifest" files in a directory, sorted by id.
std::vector<ModelManifest> load_manifest_dir(const std::filesystem::path& dir);

std::string to_string(Task t);

}  // namespace flakelens::infer
