// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/infer/records.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace flakelens::infer {

using nlohmann::json;

double round_to(double v, int decimals) noexcept {
    const double k = std::pow(10.0, decimals);
    return std::round(v * k) / k;
}

json encode_rle(const core::BitMask& mask) {
    std::vector<std::int64_t> counts;
    bool current = false;
    std::int64_t run = 0;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (mask.get(x, y) != current) {
                counts.push_back(run);
                current = !current;
                run = 0;
            }
            ++run;
        }
    }
    counts.push_back(run);
    return {{"width", mask.width()}, {"height", mask.height()}, {"counts", counts}};
}

core::BitMask decode_rle(const json& j) {
    const int w = j.at("width").get<int>();
    const int h = j.at("height").get<int>();
    core::BitMask mask(w, h);
    std::int64_t pos = 0;
    const std::int64_t total = static_cast<std::int64_t>(w) * h;
    bool set = false;
    for (const auto& c : j.at("counts")) {
        const auto n = c.get<std::int64_t>();
        if (n < 0 || pos + n > total) {
            throw std::invalid_argument("mask run lengths exceed the mask size");
        }
        if (set) {
            for (std::int64_t p = pos; p < pos + n;) {
                const int y = static_cast<int>(p / w), x = static_cast<int>(p % w);
                const int x_end = static_cast<int>(std::min<std::int64_t>(w, x + (pos + n - p)));
                mask.set_span(y, x, x_end);
                p += x_end - x;
            }
        }
        pos += n;
        set = !set;
    }
    if (pos != total) {
        throw std::invalid_argument("mask run lengths sum to " + std::to_string(pos) + ", expected " +
                                    std::to_string(total));
    }
    return mask;
}

json detection_record(const core::Detection& det, const core::ClassSet& classes, bool include_mask) {
    json j;
    j["class_name"] = classes.contains(det.class_id) ? classes.name(det.class_id) : "class_" + std::to_string(det.class_id);
    j["class_id"] = det.class_id;
    j["confidence"] = round_to(det.confidence, 6);
    j["box"] = {round_to(det.box.x0, 3), round_to(det.box.y0, 3), round_to(det.box.x1, 3), round_to(det.box.y1, 3)};
    if (include_mask && det.mask) {
        j["mask"] = encode_rle(*det.mask);
    }
    return j;
}

core::Detection detection_from_record(const json& j, const core::ClassSet& classes) {
    core::Detection d;
    d.class_id = j.value("class_id", -1);
    if (j.contains("class_name")) {
        if (const auto id = classes.id_of(j.at("class_name").get<std::string>())) {
            d.class_id = *id;
        }
    }
    if (!classes.contains(d.class_id)) {
        throw std::invalid_argument("detection record has an unknown class");
    }
    d.confidence = j.at("confidence").get<double>();
    const auto& b = j.at("box");
    if (!b.is_array() || b.size() != 4) {
        throw std::invalid_argument("detection box must have four values");
    }
    d.box = core::PixelBox::make(b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>());
    if (j.contains("mask")) {
        d.mask = decode_rle(j.at("mask"));
    }
    return d;
}

json to_json(const PredictionFile& p, const core::ClassSet& classes, bool include_masks) {
    json dets = json::array();
    for (const auto& d : p.detections) {
        dets.push_back(detection_record(d, classes, include_masks));
    }
    return {{"image", p.image}, {"width", p.width}, {"height", p.height}, {"detections", dets}};
}

PredictionFile prediction_from_json(const json& j, const core::ClassSet& classes) {
    PredictionFile p;
    p.image = j.at("image").get<std::string>();
    p.width = j.at("width").get<int>();
    p.height = j.at("height").get<int>();
    for (const auto& d : j.at("detections")) {
        p.detections.push_back(detection_from_record(d, classes));
    }
    return p;
}

void save_prediction(const PredictionFile& p, const core::ClassSet& classes, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << to_json(p, classes).dump() << '\n';
}

PredictionFile load_prediction(const std::filesystem::path& path, const core::ClassSet& classes) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    try {
        return prediction_from_json(json::parse(in), classes);
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

}  // namespace flakelens::infer
