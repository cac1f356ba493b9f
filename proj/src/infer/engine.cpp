// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/infer/engine.hpp"

#include <charconv>

#include "flakelens/infer/errors.hpp"
#include "flakelens/infer/onnx_engine.hpp"
#include "flakelens/infer/stub_engine.hpp"

namespace flakelens::infer {

std::unique_ptr<InferenceEngine> load_engine(const ModelManifest& manifest) {
    const std::string& path = manifest.model_path;
    if (path.rfind("stub:", 0) == 0) {
        std::string scenario = path.substr(5);
        double latency_ms = 0.0;
        if (const auto at = scenario.find('@'); at != std::string::npos) {
            const std::string ms = scenario.substr(at + 1);
            const auto [end, ec] = std::from_chars(ms.data(), ms.data() + ms.size(), latency_ms);
            if (ec != std::errc{} || end != ms.data() + ms.size() || latency_ms < 0.0) {
                throw ModelLoadError("bad stub latency '" + ms + "' in " + path);
            }
            scenario.resize(at);
        }
        std::vector<StubCandidate> candidates;
        try {
            candidates = StubEngine::scenario(scenario, manifest);
        } catch (const std::invalid_argument& e) {
            throw ModelLoadError(e.what());
        }
        return std::make_unique<StubEngine>(manifest, std::move(candidates),
                                            std::chrono::microseconds(static_cast<std::int64_t>(latency_ms * 1000.0)));
    }
    return std::make_unique<OnnxEngine>(std::filesystem::path(path));
}

void check_outputs(const ModelManifest& manifest, const RawOutputs& raw) {
    for (const auto& spec : manifest.layout.outputs) {
        const auto it = raw.tensors.find(spec.name);
        if (it == raw.tensors.end()) {
            throw LayoutError(spec.name, "missing from model outputs");
        }
        if (it->second.shape != spec.shape) {
            throw LayoutError(spec.name, "shape " + shape_string(it->second.shape) + " differs from manifest " +
                                             shape_string(spec.shape));
        }
        if (static_cast<std::int64_t>(it->second.values.size()) != element_count(spec.shape)) {
            throw LayoutError(spec.name, "value count does not match its shape");
        }
    }
}

RawOutputs run_model(InferenceEngine& engine, const ModelManifest& manifest, const Tensor& input) {
    if (input.shape != manifest.input_shape()) {
        throw InferenceError("input tensor " + shape_string(input.shape) + " differs from manifest input " +
                             shape_string(manifest.input_shape()));
    }
    RawOutputs raw = engine.infer(input);
    check_outputs(manifest, raw);
    return raw;
}

RawOutputs run_model(const ModelManifest& manifest, const Tensor& input) {
    const auto engine = load_engine(manifest);
    return run_model(*engine, manifest, input);
}

}  // namespace flakelens::infer
