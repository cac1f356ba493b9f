// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>

#include "flakelens/infer/manifest.hpp"
#include "flakelens/infer/tensor.hpp"

namespace flakelens::infer {

/// Runtime adapter: executes a network and returns its raw tensors without
/// interpreting them. Implementations need not be thread-safe.
class InferenceEngine {
public:
    virtual ~InferenceEngine() = default;
    virtual RawOutputs infer(const Tensor& input) = 0;
};

/// Instantiates the engine named by manifest.model_path: an ONNX file or a
/// "stub:" scenario. Throws ModelLoadError.
std::unique_ptr<InferenceEngine> load_engine(const ModelManifest& manifest);

/// Throws LayoutError naming the first output whose shape differs from the manifest.
void check_outputs(const ModelManifest& manifest, const RawOutputs& raw);

/// Checks the input shape, runs the engine and checks the outputs.
RawOutputs run_model(InferenceEngine& engine, const ModelManifest& manifest, const Tensor& input);
/// Loads the manifest's engine for a single call.
RawOutputs run_model(const ModelManifest& manifest, const Tensor& input);

}  // namespace flakelens::infer
