// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "flakelens/core/geometry.hpp"
#include "flakelens/infer/engine.hpp"

namespace flakelens::infer {

/// A candidate the stub places in its output tensors. Box is in letterboxed input pixels.
struct StubCandidate {
    core::PixelBox box;
    int class_id = 0;
    float score = 0.0f;
    /// Mask coefficients; all zero when empty (which yields the box interior as mask).
    std::vector<float> coefficients;
};

/// Deterministic test double: sleeps a fixed latency and emits layout-conformant
/// tensors carrying the scripted candidates. Remaining candidate rows are zero.
class StubEngine final : public InferenceEngine {
public:
    StubEngine(ModelManifest manifest, std::vector<StubCandidate> candidates,
               std::chrono::microseconds latency = std::chrono::microseconds{0});

    /// Emit a different number of class scores than the manifest declares.
    void set_emitted_classes(int n) { emitted_classes_ = n; }
    void set_failure(bool fail) { fail_ = fail; }

    RawOutputs infer(const Tensor& input) override;

    /// Manifest for a stub with `anchors` candidate rows and a prototype tensor
    /// of input_size / 4 when segmenting.
    static ModelManifest make_manifest(core::ClassSet classes, Task task = Task::segment, int input_size = 640,
                                       int anchors = 64, int num_coefficients = 4);

    /// Named scenarios used by "stub:<scenario>" manifests: "scene", "fixture1760", "empty".
    static std::vector<StubCandidate> scenario(const std::string& name, const ModelManifest& manifest);

private:
    ModelManifest manifest_;
    std::vector<StubCandidate> candidates_;
    std::chrono::microseconds latency_;
    std::optional<int> emitted_classes_;
    bool fail_ = false;
};

}  // namespace flakelens::infer
