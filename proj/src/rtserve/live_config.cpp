// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/rtserve/live_config.hpp"

#include <set>
#include <stdexcept>

namespace flakelens::rtserve {

using nlohmann::json;

json to_json(const LiveConfig& c) {
    return {{"model_id", c.model_id},
            {"confidence", c.confidence},
            {"iou", c.iou},
            {"enabled_classes", c.enabled_classes},
            {"perturbation", c.perturbation ? robust::to_json(*c.perturbation) : json(nullptr)},
            {"overlay",
             {{"boxes", c.overlay.boxes},
              {"masks", c.overlay.masks},
              {"labels", c.overlay.labels},
              {"confidences", c.overlay.confidences}}},
            {"version", c.version}};
}

ModelRegistry::ModelRegistry(std::vector<Entry> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw std::invalid_argument("at least one model is required");
    std::set<std::string> ids;
    for (const auto& e : entries_) {
        if (!ids.insert(e.manifest.id).second) throw std::invalid_argument("duplicate model id '" + e.manifest.id + "'");
        if (!e.detector) throw std::invalid_argument("model '" + e.manifest.id + "' has no detector");
    }
}

ModelRegistry ModelRegistry::load(const std::vector<infer::ModelManifest>& manifests) {
    std::vector<Entry> entries;
    for (const auto& m : manifests) entries.push_back({m, std::make_shared<infer::Detector>(m)});
    return ModelRegistry(std::move(entries));
}

const ModelRegistry::Entry* ModelRegistry::find(const std::string& id) const noexcept {
    for (const auto& e : entries_) {
        if (e.manifest.id == id) return &e;
    }
    return nullptr;
}

json ModelRegistry::to_json() const {
    json out = json::array();
    for (const auto& e : entries_) {
        out.push_back({{"id", e.manifest.id},
                       {"task", infer::to_string(e.manifest.task)},
                       {"input_size", e.manifest.input_size},
                       {"classes", e.manifest.class_set.names()},
                       {"default_confidence", e.manifest.default_confidence},
                       {"default_iou", e.manifest.default_iou}});
    }
    return out;
}

ConfigStore::ConfigStore(const ModelRegistry& models) : models_(models) {
    const auto& m = models.entries().front().manifest;
    auto c = std::make_shared<LiveConfig>();
    c->model_id = m.id;
    c->confidence = m.default_confidence;
    c->iou = m.default_iou;
    c->version = 1;
    current_ = std::move(c);
}

std::shared_ptr<const LiveConfig> ConfigStore::current() const {
    std::lock_guard lock(mutex_);
    return current_;
}

namespace {

void read_fraction(const json& patch, const char* key, double& out, std::vector<FieldError>& errors) {
    if (!patch.contains(key)) return;
    const json& v = patch.at(key);
    if (!v.is_number()) {
        errors.push_back({key, "must be a number"});
        return;
    }
    const double d = v.get<double>();
    if (!(d >= 0.0 && d <= 1.0)) {
        errors.push_back({key, "must lie in [0, 1], got " + v.dump()});
        return;
    }
    out = d;
}

}  // namespace

std::variant<std::shared_ptr<const LiveConfig>, std::vector<FieldError>> ConfigStore::update(const json& patch) {
    std::vector<FieldError> errors;
    if (!patch.is_object()) {
        errors.push_back({"", "config must be a JSON object"});
        return errors;
    }
    std::lock_guard lock(mutex_);
    LiveConfig next = *current_;
    static const std::set<std::string> known = {"model_id", "confidence",   "iou",    "enabled_classes",
                                                "perturbation", "overlay", "version"};
    for (const auto& [key, _] : patch.items()) {
        if (!known.count(key)) errors.push_back({key, "unknown field"});
    }
    if (patch.contains("model_id")) {
        const json& v = patch.at("model_id");
        if (!v.is_string()) {
            errors.push_back({"model_id", "must be a string"});
        } else if (!models_.find(v.get<std::string>())) {
            errors.push_back({"model_id", "no loaded model '" + v.get<std::string>() + "'"});
        } else {
            next.model_id = v.get<std::string>();
        }
    }
    read_fraction(patch, "confidence", next.confidence, errors);
    read_fraction(patch, "iou", next.iou, errors);
    if (patch.contains("enabled_classes")) {
        const json& v = patch.at("enabled_classes");
        std::vector<int> ids;
        bool ok = v.is_array();
        if (ok) {
            for (const auto& e : v) {
                if (!e.is_number_integer()) {
                    ok = false;
                    break;
                }
                ids.push_back(e.get<int>());
            }
        }
        if (!ok) {
            errors.push_back({"enabled_classes", "must be an array of class ids"});
        } else {
            next.enabled_classes = std::move(ids);
        }
    }
    if (const auto* entry = models_.find(next.model_id)) {
        const auto& classes = entry->manifest.class_set;
        for (int id : next.enabled_classes) {
            if (!classes.contains(id)) {
                errors.push_back({"enabled_classes", "class id " + std::to_string(id) + " is not defined for model '" +
                                                         next.model_id + "'"});
                break;
            }
        }
    }
    if (patch.contains("perturbation")) {
        const json& v = patch.at("perturbation");
        if (v.is_null()) {
            next.perturbation.reset();
        } else {
            try {
                next.perturbation = robust::perturbation_from_json(v);
            } catch (const std::exception& e) {
                errors.push_back({"perturbation", e.what()});
            }
        }
    }
    if (patch.contains("overlay")) {
        const json& v = patch.at("overlay");
        if (!v.is_object()) {
            errors.push_back({"overlay", "must be an object"});
        } else {
            for (const auto& [key, val] : v.items()) {
                bool* target = key == "boxes"         ? &next.overlay.boxes
                               : key == "masks"       ? &next.overlay.masks
                               : key == "labels"      ? &next.overlay.labels
                               : key == "confidences" ? &next.overlay.confidences
                                                      : nullptr;
                if (!target) {
                    errors.push_back({"overlay." + key, "unknown field"});
                } else if (!val.is_boolean()) {
                    errors.push_back({"overlay." + key, "must be true or false"});
                } else {
                    *target = val.get<bool>();
                }
            }
        }
    }
    if (!errors.empty()) return errors;
    next.version = current_->version + 1;
    current_ = std::make_shared<const LiveConfig>(std::move(next));
    return current_;
}

}  // namespace flakelens::rtserve
