// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/infer/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "flakelens/infer/errors.hpp"

namespace flakelens::infer {

using core::BitMask;
using core::Detection;
using core::PixelBox;

std::vector<Candidate> decode_detections(const RawOutputs& raw, const ModelManifest& manifest, double conf_thresh) {
    const OutputLayout& layout = manifest.layout;
    const Tensor& pred = raw.at(layout.predictions);
    const std::int64_t n = layout.candidate_count();
    const std::int64_t channels = layout.channel_count();
    if (pred.shape != layout.output(layout.predictions).shape) {
        throw LayoutError(layout.predictions, "shape " + shape_string(pred.shape) + " differs from manifest");
    }
    const int nc = static_cast<int>(manifest.class_set.size());
    const int box_at = layout.slot_offset(Slot::box, nc);
    const int score_at = layout.slot_offset(Slot::scores, nc);
    const int coef_at = layout.slot_offset(Slot::coefficients, nc);
    const int nm = manifest.task == Task::segment ? layout.num_coefficients : 0;
    auto value = [&](std::int64_t row, std::int64_t ch) {
        return pred.values[static_cast<std::size_t>(layout.anchors_last ? ch * n + row : row * channels + ch)];
    };
    std::vector<Candidate> out;
    for (std::int64_t row = 0; row < n; ++row) {
        int best = 0;
        float best_score = value(row, score_at);
        for (int c = 1; c < nc; ++c) {
            const float v = value(row, score_at + c);
            if (v > best_score) {
                best_score = v;
                best = c;
            }
        }
        double conf = best_score;
        if (layout.scores_are_logits) {
            conf = 1.0 / (1.0 + std::exp(-conf));
        }
        if (!(conf >= conf_thresh)) {
            continue;
        }
        const double a = value(row, box_at), b = value(row, box_at + 1);
        const double c = value(row, box_at + 2), d = value(row, box_at + 3);
        PixelBox box = layout.box_format == "xyxy" ? PixelBox{a, b, c, d}
                                                   : PixelBox{a - c / 2.0, b - d / 2.0, a + c / 2.0, b + d / 2.0};
        if (!box.valid()) {
            continue;
        }
        Candidate cand;
        cand.detection = Detection{best, conf, box, std::nullopt};
        cand.index = static_cast<std::size_t>(row);
        for (int k = 0; k < nm; ++k) {
            cand.coefficients.push_back(value(row, coef_at + k));
        }
        out.push_back(std::move(cand));
    }
    return out;
}

std::vector<std::size_t> nms_indices(std::span<const Detection> dets, double iou_thresh, bool class_aware) {
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dets[a].confidence > dets[b].confidence; });
    std::vector<std::size_t> kept;
    for (std::size_t i : order) {
        const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](std::size_t j) {
            if (class_aware && dets[j].class_id != dets[i].class_id) {
                return false;
            }
            return core::iou_box(dets[i].box, dets[j].box) >= iou_thresh;
        });
        if (!suppressed) {
            kept.push_back(i);
        }
    }
    return kept;
}

std::vector<Detection> nms(std::span<const Detection> dets, double iou_thresh, bool class_aware) {
    std::vector<Detection> out;
    for (std::size_t i : nms_indices(dets, iou_thresh, class_aware)) {
        out.push_back(dets[i]);
    }
    return out;
}

namespace {

// Pixel columns/rows whose centers fall in [lo, hi), clipped to [0, limit).
std::pair<int, int> center_span(double lo, double hi, int limit) {
    const double b = std::ceil(lo - 0.5);
    const double e = std::ceil(hi - 0.5);
    return {static_cast<int>(std::clamp(b, 0.0, static_cast<double>(limit))),
            static_cast<int>(std::clamp(e, 0.0, static_cast<double>(limit)))};
}

struct Tap {
    int lo, hi;
    float t;
};

Tap half_pixel_tap(int o, int in_len, int out_len) {
    double c = (o + 0.5) * static_cast<double>(in_len) / out_len - 0.5;
    c = std::clamp(c, 0.0, static_cast<double>(in_len - 1));
    const int lo = static_cast<int>(c);
    return {lo, std::min(lo + 1, in_len - 1), static_cast<float>(c - lo)};
}

}  // namespace

BitMask compose_mask(std::span<const float> coefficients, const Tensor& prototypes, const PixelBox& box, int target) {
    const Shape& s = prototypes.shape;
    if (!(s.size() == 4 && s[0] == 1) && s.size() != 3) {
        throw std::invalid_argument("prototypes must be [1, K, h, w] or [K, h, w], got " + shape_string(s));
    }
    const std::size_t off = s.size() - 3;
    const std::int64_t k = s[off], h = s[off + 1], w = s[off + 2];
    if (static_cast<std::int64_t>(coefficients.size()) != k) {
        throw std::invalid_argument("mask has " + std::to_string(coefficients.size()) + " coefficients but " +
                                    std::to_string(k) + " prototypes");
    }
    BitMask mask(target, target);
    const auto [x_begin, x_end] = center_span(box.x0, box.x1, target);
    const auto [y_begin, y_end] = center_span(box.y0, box.y1, target);
    if (x_begin >= x_end || y_begin >= y_end) {
        return mask;
    }
    const std::size_t plane = static_cast<std::size_t>(h * w);
    std::vector<float> combined(plane, 0.0f);
    for (std::int64_t c = 0; c < k; ++c) {
        const float coef = coefficients[static_cast<std::size_t>(c)];
        const float* p = prototypes.values.data() + static_cast<std::size_t>(c) * plane;
        for (std::size_t i = 0; i < plane; ++i) {
            combined[i] += coef * p[i];
        }
    }
    for (auto& v : combined) {
        v = 1.0f / (1.0f + std::exp(-v));
    }
    const int ih = static_cast<int>(h), iw = static_cast<int>(w);
    std::vector<Tap> xs;
    for (int x = x_begin; x < x_end; ++x) xs.push_back(half_pixel_tap(x, iw, target));
    for (int y = y_begin; y < y_end; ++y) {
        const Tap ty = half_pixel_tap(y, ih, target);
        const float* r0 = combined.data() + static_cast<std::size_t>(ty.lo) * iw;
        const float* r1 = combined.data() + static_cast<std::size_t>(ty.hi) * iw;
        for (int x = x_begin; x < x_end; ++x) {
            const Tap& tx = xs[static_cast<std::size_t>(x - x_begin)];
            const float top = r0[tx.lo] + tx.t * (r0[tx.hi] - r0[tx.lo]);
            const float bot = r1[tx.lo] + tx.t * (r1[tx.hi] - r1[tx.lo]);
            if (top + ty.t * (bot - top) >= 0.5f) {
                mask.set(x, y);
            }
        }
    }
    return mask;
}

// Masks are sampled at source pixel centers and limited to pixels whose
// centers lie inside the unmapped box, matching the box rasterization rule.
std::vector<Detection> unmap_coords(std::vector<Detection> dets, const LetterboxTransform& t) {
    std::vector<Detection> out;
    out.reserve(dets.size());
    for (auto& d : dets) {
        const PixelBox box = t.to_source(d.box).clamped(t.source_width, t.source_height);
        if (!box.valid()) {
            continue;
        }
        if (d.mask) {
            const BitMask& lb = *d.mask;
            BitMask src(t.source_width, t.source_height);
            const auto [x_begin, x_end] = center_span(box.x0, box.x1, t.source_width);
            const auto [y_begin, y_end] = center_span(box.y0, box.y1, t.source_height);
            std::vector<int> lx;
            for (int x = x_begin; x < x_end; ++x) {
                const double p = (x + 0.5) * t.scale + t.pad_x;
                lx.push_back(std::clamp(static_cast<int>(std::floor(p)), 0, lb.width() - 1));
            }
            for (int y = y_begin; y < y_end; ++y) {
                const double p = (y + 0.5) * t.scale + t.pad_y;
                const int ly = std::clamp(static_cast<int>(std::floor(p)), 0, lb.height() - 1);
                for (int x = x_begin; x < x_end; ++x) {
                    if (lb.get(lx[static_cast<std::size_t>(x - x_begin)], ly)) {
                        src.set(x, y);
                    }
                }
            }
            d.mask = std::move(src);
        }
        d.box = box;
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace flakelens::infer
