// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/infer/stub_engine.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

#include "flakelens/infer/errors.hpp"

namespace flakelens::infer {

StubEngine::StubEngine(ModelManifest manifest, std::vector<StubCandidate> candidates,
                       std::chrono::microseconds latency)
    : manifest_(std::move(manifest)), candidates_(std::move(candidates)), latency_(latency) {
    manifest_.validate();
    if (static_cast<std::int64_t>(candidates_.size()) > manifest_.layout.candidate_count()) {
        throw std::invalid_argument("stub has more candidates than the layout has rows");
    }
}

// Prototype planes are constant 1, so a candidate's mask is its box interior
// when its coefficients sum to >= 0 and empty otherwise.
RawOutputs StubEngine::infer(const Tensor&) {
    if (fail_) {
        throw InferenceError("stub engine configured to fail");
    }
    if (latency_.count() > 0) {
        std::this_thread::sleep_for(latency_);
    }
    const OutputLayout& layout = manifest_.layout;
    const int nc = emitted_classes_.value_or(static_cast<int>(manifest_.class_set.size()));
    const int nm = manifest_.task == Task::segment ? layout.num_coefficients : 0;
    const std::int64_t n = layout.candidate_count();
    const std::int64_t channels = 4 + nc + nm;
    Shape shape = layout.anchors_last ? Shape{1, channels, n} : Shape{1, n, channels};
    Tensor pred(shape);
    auto put = [&](std::int64_t row, std::int64_t ch, float v) {
        const std::int64_t i = layout.anchors_last ? ch * n + row : row * channels + ch;
        pred.values[static_cast<std::size_t>(i)] = v;
    };
    const int box_at = layout.slot_offset(Slot::box, nc);
    const int score_at = layout.slot_offset(Slot::scores, nc);
    const int coef_at = layout.slot_offset(Slot::coefficients, nc);
    for (std::size_t k = 0; k < candidates_.size(); ++k) {
        const auto row = static_cast<std::int64_t>(k);
        const StubCandidate& c = candidates_[k];
        const auto& b = c.box;
        if (layout.box_format == "xyxy") {
            put(row, box_at + 0, static_cast<float>(b.x0));
            put(row, box_at + 1, static_cast<float>(b.y0));
            put(row, box_at + 2, static_cast<float>(b.x1));
            put(row, box_at + 3, static_cast<float>(b.y1));
        } else {
            put(row, box_at + 0, static_cast<float>((b.x0 + b.x1) / 2.0));
            put(row, box_at + 1, static_cast<float>((b.y0 + b.y1) / 2.0));
            put(row, box_at + 2, static_cast<float>(b.width()));
            put(row, box_at + 3, static_cast<float>(b.height()));
        }
        if (c.class_id >= 0 && c.class_id < nc) {
            float score = c.score;
            if (layout.scores_are_logits) {
                score = std::log(score / (1.0f - score));
            }
            put(row, score_at + c.class_id, score);
        }
        if (nm > 0) {
            for (int j = 0; j < nm && j < static_cast<int>(c.coefficients.size()); ++j) {
                put(row, coef_at + j, c.coefficients[static_cast<std::size_t>(j)]);
            }
        }
    }
    if (layout.scores_are_logits) {
        // Rows without a candidate need a very negative logit rather than 0 (= 0.5).
        for (std::int64_t row = 0; row < n; ++row) {
            for (int cls = 0; cls < nc; ++cls) {
                const bool scripted = row < static_cast<std::int64_t>(candidates_.size()) &&
                                      candidates_[static_cast<std::size_t>(row)].class_id == cls;
                if (!scripted) put(row, score_at + cls, -20.0f);
            }
        }
    }
    RawOutputs out;
    out.tensors.emplace(layout.predictions, std::move(pred));
    if (layout.prototypes) {
        const auto& spec = layout.output(*layout.prototypes);
        Shape proto_shape = spec.shape;
        proto_shape[1] = nm;
        out.tensors.emplace(*layout.prototypes,
                            Tensor(proto_shape, std::vector<float>(static_cast<std::size_t>(element_count(proto_shape)), 1.0f)));
    }
    return out;
}

ModelManifest StubEngine::make_manifest(core::ClassSet classes, Task task, int input_size, int anchors,
                                        int num_coefficients) {
    ModelManifest m;
    m.id = "stub";
    m.model_path = "stub:scene";
    m.task = task;
    m.input_size = input_size;
    const auto nc = static_cast<std::int64_t>(classes.size());
    m.class_set = std::move(classes);
    const int nm = task == Task::segment ? num_coefficients : 0;
    m.layout.predictions = "output0";
    m.layout.outputs.push_back({"output0", {1, 4 + nc + nm, anchors}});
    if (task == Task::segment) {
        m.layout.prototypes = "output1";
        m.layout.num_coefficients = nm;
        m.layout.outputs.push_back({"output1", {1, nm, input_size / 4, input_size / 4}});
    } else {
        m.layout.slots = {Slot::box, Slot::scores};
    }
    m.validate();
    return m;
}

std::vector<StubCandidate> StubEngine::scenario(const std::string& name, const ModelManifest& manifest) {
    const double s = manifest.input_size;
    const int nc = static_cast<int>(manifest.class_set.size());
    const std::size_t nm = manifest.task == Task::segment ? static_cast<std::size_t>(manifest.layout.num_coefficients) : 0;
    std::vector<StubCandidate> out;
    if (name == "empty") {
        return out;
    }
    if (name == "fixture1760") {
        // Box (10,10)-(50,54) of a 100x100 source letterboxed with scale input/100.
        const double k = s / 100.0;
        out.push_back({core::PixelBox::make(10 * k, 10 * k, 50 * k, 54 * k), 0, 0.9f, std::vector<float>(nm, 0.0f)});
        return out;
    }
    if (name == "scene") {
        // A 4x3 grid of flakes with confidences spread over 0.15-0.95 and
        // cycling classes, plus one near-duplicate that NMS must remove. The
        // grid sits in the central half of the input so that it survives the
        // letterbox padding of 16:9 frames.
        const int cols = 4, rows = 3;
        const double cell_w = s / cols, cell_h = s / 2 / rows;
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                const int k = r * cols + c;
                const double w = cell_w * (0.35 + 0.05 * (k % 4));
                const double h = cell_h * (0.30 + 0.05 * (k % 3));
                const double cx = (c + 0.5) * cell_w, cy = s / 4 + (r + 0.5) * cell_h;
                const float conf = static_cast<float>(0.15 + 0.8 * k / (cols * rows - 1));
                out.push_back({core::PixelBox::make(cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2), k % nc, conf,
                               std::vector<float>(nm, 0.0f)});
            }
        }
        StubCandidate dup = out.back();
        dup.box = core::PixelBox::make(dup.box.x0 + 2, dup.box.y0 + 2, dup.box.x1 + 2, dup.box.y1 + 2);
        dup.score = 0.6f;
        out.push_back(dup);
        const auto limit = static_cast<std::size_t>(manifest.layout.candidate_count());
        if (out.size() > limit) out.resize(limit);
        return out;
    }
    throw std::invalid_argument("unknown stub scenario '" + name + "' (expected scene, fixture1760 or empty)");
}

}  // namespace flakelens::infer
