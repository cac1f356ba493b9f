// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/infer/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "flakelens/infer/errors.hpp"

namespace flakelens::infer {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, std::initializer_list<std::string_view> known, const std::string& where) {
    if (!j.is_object()) {
        throw ManifestError(where + " must be an object");
    }
    for (const auto& [key, value] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ManifestError("unknown key '" + key + "' in " + where);
        }
    }
}

template <class T>
T get_field(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) {
        throw ManifestError("missing key '" + std::string(key) + "' in " + where);
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ManifestError("bad value for '" + std::string(key) + "' in " + where + ": " + e.what());
    }
}

Slot slot_from_string(const std::string& s) {
    if (s == "box") return Slot::box;
    if (s == "scores") return Slot::scores;
    if (s == "coefficients") return Slot::coefficients;
    throw ManifestError("unknown slot '" + s + "'");
}

std::string slot_name(Slot s) {
    switch (s) {
        case Slot::box: return "box";
        case Slot::scores: return "scores";
        case Slot::coefficients: return "coefficients";
    }
    return "?";
}

}  // namespace

std::string to_string(Task t) { return t == Task::segment ? "segment" : "detect"; }

const TensorSpec& OutputLayout::output(const std::string& name) const {
    const auto it = std::find_if(outputs.begin(), outputs.end(), [&](const TensorSpec& s) { return s.name == name; });
    if (it == outputs.end()) {
        throw ManifestError("layout references undeclared output '" + name + "'");
    }
    return *it;
}

std::int64_t OutputLayout::candidate_count() const {
    const auto& s = output(predictions).shape;
    return anchors_last ? s[2] : s[1];
}

std::int64_t OutputLayout::channel_count() const {
    const auto& s = output(predictions).shape;
    return anchors_last ? s[1] : s[2];
}

int OutputLayout::slot_offset(Slot slot, int num_classes) const {
    int offset = 0;
    for (Slot s : slots) {
        if (s == slot) {
            return offset;
        }
        offset += s == Slot::box ? 4 : s == Slot::scores ? num_classes : num_coefficients;
    }
    return -1;
}

void ModelManifest::validate() const {
    if (input_size <= 0 || input_size % 32 != 0) {
        throw ManifestError("input_size must be a positive multiple of 32, got " + std::to_string(input_size));
    }
    if (!(pixel_norm > 0.0)) {
        throw ManifestError("pixel_norm must be positive");
    }
    if (!(default_confidence >= 0.0 && default_confidence <= 1.0)) {
        throw ManifestError("defaults.confidence must be in [0, 1]");
    }
    if (!(default_iou > 0.0 && default_iou < 1.0)) {
        throw ManifestError("defaults.iou must be in (0, 1)");
    }
    if (layout.box_format != "cxcywh" && layout.box_format != "xyxy") {
        throw ManifestError("layout.box_format must be cxcywh or xyxy");
    }
    std::set<std::string> names;
    for (const auto& o : layout.outputs) {
        if (!names.insert(o.name).second) {
            throw ManifestError("duplicate output '" + o.name + "'");
        }
        if (o.shape.empty() || std::any_of(o.shape.begin(), o.shape.end(), [](auto d) { return d <= 0; })) {
            throw ManifestError("output '" + o.name + "' needs a fully static positive shape");
        }
    }
    const auto& pred = layout.output(layout.predictions).shape;
    if (pred.size() != 3 || pred[0] != 1) {
        throw ManifestError("predictions tensor must have shape [1, C, N] or [1, N, C]");
    }
    std::set<Slot> seen(layout.slots.begin(), layout.slots.end());
    if (seen.size() != layout.slots.size() || !seen.contains(Slot::box) || !seen.contains(Slot::scores)) {
        throw ManifestError("layout.slots must list box and scores once each");
    }
    const int nc = static_cast<int>(class_set.size());
    if (task == Task::segment) {
        if (!layout.prototypes || layout.num_coefficients <= 0 || !seen.contains(Slot::coefficients)) {
            throw ManifestError("segment task needs prototypes, coefficients slot and num_coefficients > 0");
        }
        const auto& proto = layout.output(*layout.prototypes).shape;
        if (proto.size() != 4 || proto[0] != 1 || proto[1] != layout.num_coefficients) {
            throw ManifestError("prototypes must have shape [1, num_coefficients, h, w]");
        }
    } else if (layout.prototypes || layout.num_coefficients != 0) {
        throw ManifestError("detect task must not declare prototypes or coefficients");
    }
    const std::int64_t expected = 4 + nc + (task == Task::segment ? layout.num_coefficients : 0);
    if (layout.channel_count() != expected) {
        throw ManifestError("predictions carry " + std::to_string(layout.channel_count()) +
                            " values per candidate but 4 box + " + std::to_string(nc) + " class scores" +
                            (task == Task::segment ? " + " + std::to_string(layout.num_coefficients) + " coefficients"
                                                   : std::string()) +
                            " = " + std::to_string(expected) + " are declared");
    }
}

ModelManifest parse_manifest(const json& j, const std::filesystem::path& base_dir, std::string id) {
    reject_unknown(j, {"model_path", "task", "input_size", "class_set", "layout", "pixel_norm", "defaults"}, "manifest");
    ModelManifest m;
    m.id = std::move(id);
    const auto path = get_field<std::string>(j, "model_path", "manifest");
    if (path.rfind("stub:", 0) == 0 || std::filesystem::path(path).is_absolute()) {
        m.model_path = path;
    } else {
        m.model_path = (base_dir / path).lexically_normal().string();
    }
    const auto task = get_field<std::string>(j, "task", "manifest");
    if (task == "detect") {
        m.task = Task::detect;
    } else if (task == "segment") {
        m.task = Task::segment;
    } else {
        throw ManifestError("task must be detect or segment, got '" + task + "'");
    }
    if (j.contains("input_size")) {
        m.input_size = get_field<int>(j, "input_size", "manifest");
    }
    try {
        m.class_set = core::ClassSet(get_field<std::vector<std::string>>(j, "class_set", "manifest"));
    } catch (const std::invalid_argument& e) {
        throw ManifestError(std::string("class_set: ") + e.what());
    }
    if (j.contains("pixel_norm")) {
        m.pixel_norm = get_field<double>(j, "pixel_norm", "manifest");
    }
    if (j.contains("defaults")) {
        const auto& d = j.at("defaults");
        reject_unknown(d, {"confidence", "iou"}, "defaults");
        if (d.contains("confidence")) m.default_confidence = get_field<double>(d, "confidence", "defaults");
        if (d.contains("iou")) m.default_iou = get_field<double>(d, "iou", "defaults");
    }
    const json& l = j.contains("layout") ? j.at("layout") : throw ManifestError("missing key 'layout' in manifest");
    reject_unknown(l,
                   {"input", "outputs", "predictions", "prototypes", "anchors_last", "slots", "box_format",
                    "num_coefficients", "scores_are_logits"},
                   "layout");
    OutputLayout& lay = m.layout;
    if (l.contains("input")) lay.input = get_field<std::string>(l, "input", "layout");
    if (!l.contains("outputs") || !l.at("outputs").is_array()) {
        throw ManifestError("layout.outputs must be a list");
    }
    for (const auto& o : l.at("outputs")) {
        reject_unknown(o, {"name", "shape"}, "layout.outputs entry");
        lay.outputs.push_back({get_field<std::string>(o, "name", "layout.outputs entry"),
                               get_field<Shape>(o, "shape", "layout.outputs entry")});
    }
    lay.predictions = get_field<std::string>(l, "predictions", "layout");
    if (l.contains("prototypes") && !l.at("prototypes").is_null()) {
        lay.prototypes = get_field<std::string>(l, "prototypes", "layout");
    }
    if (l.contains("anchors_last")) lay.anchors_last = get_field<bool>(l, "anchors_last", "layout");
    if (l.contains("slots")) {
        lay.slots.clear();
        for (const auto& s : get_field<std::vector<std::string>>(l, "slots", "layout")) {
            lay.slots.push_back(slot_from_string(s));
        }
    }
    if (l.contains("box_format")) lay.box_format = get_field<std::string>(l, "box_format", "layout");
    if (l.contains("num_coefficients")) lay.num_coefficients = get_field<int>(l, "num_coefficients", "layout");
    if (l.contains("scores_are_logits")) lay.scores_are_logits = get_field<bool>(l, "scores_are_logits", "layout");
    if (m.task == Task::detect) {
        std::erase(lay.slots, Slot::coefficients);
    }
    m.validate();
    return m;
}

ModelManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ManifestError("cannot read manifest " + path.string());
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ManifestError(path.string() + ": " + e.what());
    }
    try {
        return parse_manifest(j, path.parent_path(), path.stem().string());
    } catch (const ManifestError& e) {
        throw ManifestError(path.string() + ": " + e.what());
    }
}

json to_json(const ModelManifest& m) {
    json outputs = json::array();
    for (const auto& o : m.layout.outputs) {
        outputs.push_back({{"name", o.name}, {"shape", o.shape}});
    }
    json slots = json::array();
    for (Slot s : m.layout.slots) {
        slots.push_back(slot_name(s));
    }
    json layout = {{"input", m.layout.input},
                   {"outputs", outputs},
                   {"predictions", m.layout.predictions},
                   {"anchors_last", m.layout.anchors_last},
                   {"slots", slots},
                   {"box_format", m.layout.box_format},
                   {"num_coefficients", m.layout.num_coefficients},
                   {"scores_are_logits", m.layout.scores_are_logits}};
    if (m.layout.prototypes) {
        layout["prototypes"] = *m.layout.prototypes;
    }
    return {{"model_path", m.model_path},
            {"task", to_string(m.task)},
            {"input_size", m.input_size},
            {"class_set", m.class_set.names()},
            {"layout", layout},
            {"pixel_norm", m.pixel_norm},
            {"defaults", {{"confidence", m.default_confidence}, {"iou", m.default_iou}}}};
}

std::vector<ModelManifest> load_manifest_dir(const std::filesystem::path& dir) {
    std::vector<ModelManifest> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".manifest") {
            out.push_back(load_manifest(entry.path()));
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    return out;
}

}  // namespace flakelens::infer
