// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/metrics/report.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include "flakelens/core/image_io.hpp"
#include "flakelens/dataset/labels.hpp"
#include "flakelens/infer/records.hpp"

namespace flakelens::metrics {

namespace fs = std::filesystem;
using nlohmann::json;

EvalReport evaluate(std::span<const EvalImage> corpus, const core::ClassSet& classes, const EvalConfig& config) {
    const int nc = static_cast<int>(classes.size());
    EvalReport r;
    r.class_names = classes.names();
    r.geometry = config.geometry;
    r.range_end = config.range_end;
    r.thresholds = iou_range(config.range_end);
    r.images = corpus.size();

    const ApTable table = ap_table(corpus, nc, r.thresholds, config.geometry);
    const std::vector<double> at50{0.5};
    r.map50 = map_at(corpus, nc, at50, config.geometry);
    r.map_range = table.mean();

    r.classes.resize(static_cast<std::size_t>(nc));
    for (int c = 0; c < nc; ++c) {
        auto& s = r.classes[c];
        s.gt_count = class_gt_count(corpus, c);
        for (const auto& img : corpus) {
            s.det_count += static_cast<std::size_t>(std::count_if(
                img.dets.begin(), img.dets.end(), [&](const Region& d) { return d.class_id == c; }));
        }
        s.ap = table.per_class[c];
        s.pr_precision = pr_samples(class_hits(corpus, c, 0.5, config.geometry), s.gt_count);
    }
    r.confusion = confusion_matrix(corpus, nc, config.confusion_iou, config.confusion_conf, config.geometry);
    return r;
}

namespace {

std::string fixed(double v, int decimals) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(decimals) << v;
    return os.str();
}

}  // namespace

std::string format_report(const EvalReport& r) {
    std::ostringstream os;
    os << "report.eval\n";
    os << "  geometry: " << to_string(r.geometry) << "\n";
    os << "  images: " << r.images << "\n";
    os << "  thresholds:";
    for (double t : r.thresholds) os << ' ' << fixed(t, 2);
    os << "\n";
    os << "  mAP50: " << fixed(r.map50, 6) << "\n";
    os << "  " << r.range_label() << ": " << fixed(r.map_range, 6) << "\n";
    os << "  classes:\n";
    for (std::size_t c = 0; c < r.classes.size(); ++c) {
        const auto& s = r.classes[c];
        os << "    " << r.class_names[c] << ":\n";
        os << "      gt: " << s.gt_count << "\n";
        os << "      detections: " << s.det_count << "\n";
        if (!s.ap) {
            os << "      AP: undefined\n";
            continue;
        }
        double mean = 0.0;
        for (double v : *s.ap) mean += v;
        mean /= static_cast<double>(s.ap->size());
        os << "      AP50: " << fixed(s.ap->front(), 6) << "\n";
        os << "      " << r.range_label() << ": " << fixed(mean, 6) << "\n";
        os << "      AP:";
        for (std::size_t k = 0; k < s.ap->size(); ++k) os << ' ' << fixed(r.thresholds[k], 2) << '=' << fixed((*s.ap)[k], 6);
        os << "\n      pr_precision:";
        for (double p : s.pr_precision) os << ' ' << fixed(p, 4);
        os << "\n";
    }
    const int n = r.confusion.num_classes();
    std::vector<std::string> headers = r.class_names;
    headers.push_back("background");
    std::size_t width = 6;
    for (const auto& h : headers) width = std::max(width, h.size());
    os << "  confusion_matrix:\n";
    os << "    " << std::setw(static_cast<int>(width)) << "gt\\pred";
    for (const auto& h : headers) os << ' ' << std::setw(static_cast<int>(width)) << h;
    os << "\n";
    for (int g = 0; g <= n; ++g) {
        os << "    " << std::setw(static_cast<int>(width)) << headers[g];
        for (int p = 0; p <= n; ++p) os << ' ' << std::setw(static_cast<int>(width)) << r.confusion.at(g, p);
        os << "\n";
    }
    os << "  accuracy:\n";
    for (int c = 0; c < n; ++c) {
        const auto a = r.confusion.accuracy(c);
        os << "    " << r.class_names[c] << ": " << (a ? fixed(*a, 6) : std::string("undefined")) << "\n";
    }
    return os.str();
}

json to_json(const EvalReport& r) {
    json j;
    j["geometry"] = to_string(r.geometry);
    j["images"] = r.images;
    j["thresholds"] = r.thresholds;
    j["mAP50"] = infer::round_to(r.map50, 6);
    j[r.range_label()] = infer::round_to(r.map_range, 6);
    json classes = json::array();
    for (std::size_t c = 0; c < r.classes.size(); ++c) {
        const auto& s = r.classes[c];
        json e{{"name", r.class_names[c]}, {"gt", s.gt_count}, {"detections", s.det_count}};
        e["ap"] = s.ap ? json(*s.ap) : json(nullptr);
        e["pr_precision"] = s.pr_precision;
        classes.push_back(std::move(e));
    }
    j["classes"] = std::move(classes);
    json grid = json::array();
    for (int g = 0; g <= r.confusion.num_classes(); ++g) {
        json row = json::array();
        for (int p = 0; p <= r.confusion.num_classes(); ++p) row.push_back(r.confusion.at(g, p));
        grid.push_back(std::move(row));
    }
    j["confusion_matrix"] = std::move(grid);
    return j;
}

void write_report(const EvalReport& r, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    out << format_report(r);
    out.flush();
    if (!out) throw std::runtime_error("cannot write report to " + path.string());
}

std::vector<EvalImage> load_corpus(const fs::path& pred_dir, const fs::path& gt_dir, const core::ClassSet& classes) {
    if (!fs::is_directory(pred_dir)) throw std::runtime_error("prediction directory not found: " + pred_dir.string());
    if (!fs::is_directory(gt_dir)) throw std::runtime_error("ground-truth directory not found: " + gt_dir.string());
    const fs::path labels = fs::is_directory(gt_dir / "labels") ? gt_dir / "labels" : gt_dir;

    std::map<std::string, fs::path> preds, truths;
    for (const auto& e : fs::directory_iterator(pred_dir)) {
        if (e.is_regular_file() && e.path().extension() == ".json") preds[e.path().stem().string()] = e.path();
    }
    for (const auto& e : fs::directory_iterator(labels)) {
        if (e.is_regular_file() && e.path().extension() == ".txt" && e.path().filename() != "classes.txt") {
            truths[e.path().stem().string()] = e.path();
        }
    }
    std::map<std::string, fs::path> images;
    if (fs::is_directory(gt_dir / "images")) {
        for (const auto& p : core::list_images(gt_dir / "images")) images[p.stem().string()] = p;
    }

    std::map<std::string, EvalImage> out;
    for (const auto& [id, path] : preds) {
        const infer::PredictionFile p = infer::load_prediction(path, classes);
        EvalImage& img = out[id];
        img.id = id;
        img.width = p.width;
        img.height = p.height;
        img.dets = p.detections;
    }
    for (const auto& [id, path] : truths) {
        EvalImage& img = out[id];
        if (img.id.empty()) {
            img.id = id;
            const auto it = images.find(id);
            if (it == images.end()) {
                throw std::runtime_error("no prediction file or image to size ground truth " + path.string());
            }
            const core::ImageBuffer im = core::load_image(it->second);
            img.width = im.width();
            img.height = im.height();
        }
        const auto instances = dataset::read_label_path(path, classes);
        img.gts = truth_regions(instances, img.width, img.height);
    }
    std::vector<EvalImage> corpus;
    corpus.reserve(out.size());
    for (auto& [id, img] : out) {
        for (auto& d : img.dets) {
            if (!d.mask) d.mask = core::rasterize_box(d.box, img.width, img.height);
        }
        corpus.push_back(std::move(img));
    }
    return corpus;
}

}  // namespace flakelens::metrics
