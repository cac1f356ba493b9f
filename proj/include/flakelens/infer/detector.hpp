// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <mutex>
#include <vector>

#include "flakelens/core/image.hpp"
#include "flakelens/core/instance.hpp"
#include "flakelens/infer/engine.hpp"
#include "flakelens/infer/letterbox.hpp"
#include "flakelens/infer/manifest.hpp"

namespace flakelens::infer {

struct DetectOptions {
    double confidence = 0.25;
    double iou = 0.45;
    bool class_aware = true;
    /// Empty means every class is enabled.
    std::vector<int> enabled_classes;
    bool masks = true;

    static DetectOptions defaults_for(const ModelManifest& m);
};

struct StageTimings {
    double preprocess_ms = 0.0;
    double inference_ms = 0.0;
    double postprocess_ms = 0.0;
};

struct DetectionResult {
    std::vector<core::Detection> detections;
    StageTimings timings;
    LetterboxTransform transform;
};

/// Full chain: letterbox, run, decode, NMS, mask composition and unmapping.
/// detect() calls are serialized per instance.
class Detector {
public:
    Detector(ModelManifest manifest, std::unique_ptr<InferenceEngine> engine);
    /// Loads the engine named by the manifest.
    explicit Detector(ModelManifest manifest);

    DetectionResult detect(const core::ImageBuffer& img, const DetectOptions& options);
    const ModelManifest& manifest() const noexcept { return manifest_; }

private:
    ModelManifest manifest_;
    std::unique_ptr<InferenceEngine> engine_;
    std::mutex mutex_;
};

}  // namespace flakelens::infer
