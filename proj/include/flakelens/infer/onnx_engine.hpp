// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "flakelens/infer/engine.hpp"

namespace flakelens::infer {

/// CPU interpreter for a float32 subset of ONNX (opsets 7 through 21):
/// convolution, pooling, resize, element-wise math with broadcasting and the
/// shape-manipulation operators emitted by common detector exports.
class OnnxEngine final : public InferenceEngine {
public:
    /// Throws ModelLoadError for missing or corrupt files and unsupported operators.
    explicit OnnxEngine(const std::filesystem::path& model_path);
    OnnxEngine(const void* data, std::size_t size);
    ~OnnxEngine() override;
    OnnxEngine(OnnxEngine&&) noexcept;
    OnnxEngine& operator=(OnnxEngine&&) noexcept;

    /// Feeds `input` to the single graph input.
    RawOutputs infer(const Tensor& input) override;
    /// Multi-input form; each pair is (graph input name, tensor).
    RawOutputs run(const std::vector<std::pair<std::string, Tensor>>& inputs);

    std::vector<std::string> input_names() const;
    std::vector<std::string> output_names() const;
    static std::vector<std::string> supported_ops();

private:
    struct Graph;
    std::unique_ptr<Graph> graph_;
};

/// Reads a serialized onnx.TensorProto (the format of ONNX test data files).
Tensor load_tensor_proto(const std::filesystem::path& path);

}  // namespace flakelens::infer
