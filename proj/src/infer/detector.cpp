// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/infer/detector.hpp"

#include <algorithm>
#include <chrono>

#include "flakelens/infer/postprocess.hpp"

namespace flakelens::infer {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

DetectOptions DetectOptions::defaults_for(const ModelManifest& m) {
    DetectOptions o;
    o.confidence = m.default_confidence;
    o.iou = m.default_iou;
    return o;
}

Detector::Detector(ModelManifest manifest, std::unique_ptr<InferenceEngine> engine)
    : manifest_(std::move(manifest)), engine_(std::move(engine)) {
    manifest_.validate();
}

Detector::Detector(ModelManifest manifest) : manifest_(std::move(manifest)) {
    manifest_.validate();
    engine_ = load_engine(manifest_);
}

DetectionResult Detector::detect(const core::ImageBuffer& img, const DetectOptions& options) {
    std::lock_guard lock(mutex_);
    DetectionResult result;
    auto t0 = Clock::now();
    const Letterboxed lb = letterbox(img, manifest_.input_size);
    const Tensor input = to_input_tensor(lb.image, manifest_.pixel_norm);
    result.transform = lb.transform;
    result.timings.preprocess_ms = ms_since(t0);

    t0 = Clock::now();
    const RawOutputs raw = run_model(*engine_, manifest_, input);
    result.timings.inference_ms = ms_since(t0);

    t0 = Clock::now();
    std::vector<Candidate> cands = decode_detections(raw, manifest_, options.confidence);
    if (!options.enabled_classes.empty()) {
        std::erase_if(cands, [&](const Candidate& c) {
            return std::find(options.enabled_classes.begin(), options.enabled_classes.end(),
                             c.detection.class_id) == options.enabled_classes.end();
        });
    }
    std::vector<core::Detection> dets;
    dets.reserve(cands.size());
    for (const auto& c : cands) dets.push_back(c.detection);
    const auto kept = nms_indices(dets, options.iou, options.class_aware);
    std::vector<core::Detection> out;
    out.reserve(kept.size());
    const bool masks = options.masks && manifest_.task == Task::segment && manifest_.layout.prototypes;
    for (std::size_t i : kept) {
        core::Detection d = dets[i];
        if (masks) {
            d.mask = compose_mask(cands[i].coefficients, raw.at(*manifest_.layout.prototypes), d.box,
                                  manifest_.input_size);
        }
        out.push_back(std::move(d));
    }
    result.detections = unmap_coords(std::move(out), lb.transform);
    result.timings.postprocess_ms = ms_since(t0);
    return result;
}

}  // namespace flakelens::infer
