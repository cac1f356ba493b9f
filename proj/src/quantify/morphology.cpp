// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/quantify/morphology.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace flakelens::quantify {

std::string_view to_string(AreaBasis b) noexcept { return b == AreaBasis::mask ? "mask" : "box"; }

AreaBasis parse_basis(std::string_view s) {
    if (s == "mask") return AreaBasis::mask;
    if (s == "box") return AreaBasis::box;
    throw std::invalid_argument("area basis must be 'mask' or 'box', got '" + std::string(s) + "'");
}

namespace {

void refresh_fractions(MorphologyReport& r) {
    for (auto& c : r.classes) {
        c.fraction = r.analyzed_px ? static_cast<double>(c.area_px) / static_cast<double>(r.analyzed_px) : 0.0;
    }
}

}  // namespace

MorphologyReport area_fractions(std::span<const core::Detection> dets, int width, int height,
                                const core::ClassSet& classes, AreaBasis basis, std::size_t padded_px) {
    if (width < 1 || height < 1) throw std::invalid_argument("image dimensions must be positive");
    const std::size_t total = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (padded_px >= total) throw std::invalid_argument("padding covers the whole image");

    MorphologyReport r;
    r.basis = basis;
    r.images = 1;
    r.analyzed_px = total - padded_px;
    for (const auto& name : classes.names()) r.classes.push_back({name});

    if (basis == AreaBasis::mask) {
        for (const auto& d : dets) {
            if (!d.mask) {
                r.basis = AreaBasis::box;
                r.fell_back_to_box = true;
                break;
            }
        }
    }

    std::vector<core::BitMask> unions(classes.size());
    for (const auto& d : dets) {
        if (!classes.contains(d.class_id)) {
            throw std::invalid_argument("detection class id " + std::to_string(d.class_id) + " is not in the class set");
        }
        core::BitMask region;
        if (r.basis == AreaBasis::mask) {
            if (d.mask->width() != width || d.mask->height() != height) {
                throw std::invalid_argument("detection mask size does not match the image");
            }
            region = *d.mask;
        } else {
            region = core::rasterize_box(d.box, width, height);
        }
        auto& u = unions[d.class_id];
        if (u.bit_count() == 0) u = core::BitMask(width, height);
        u.merge(region);
        auto& c = r.classes[d.class_id];
        ++c.count;
        c.instance_area_sum += region.popcount();
    }
    for (std::size_t k = 0; k < unions.size(); ++k) {
        r.classes[k].area_px = unions[k].bit_count() ? unions[k].popcount() : 0;
    }
    refresh_fractions(r);
    return r;
}

void accumulate(MorphologyReport& total, const MorphologyReport& more) {
    if (total.classes.empty() && total.images == 0) {
        total = more;
        return;
    }
    if (total.classes.size() != more.classes.size()) throw std::invalid_argument("reports use different class sets");
    if (more.fell_back_to_box) {
        total.fell_back_to_box = true;
        total.basis = AreaBasis::box;
    }
    total.analyzed_px += more.analyzed_px;
    total.images += more.images;
    for (std::size_t k = 0; k < total.classes.size(); ++k) {
        total.classes[k].count += more.classes[k].count;
        total.classes[k].area_px += more.classes[k].area_px;
        total.classes[k].instance_area_sum += more.classes[k].instance_area_sum;
    }
    refresh_fractions(total);
}

std::vector<long> instance_counts(std::span<const core::Detection> dets, std::size_t num_classes) {
    std::vector<long> counts(num_classes, 0);
    for (const auto& d : dets) {
        if (d.class_id < 0 || static_cast<std::size_t>(d.class_id) >= num_classes) {
            throw std::invalid_argument("detection class id " + std::to_string(d.class_id) + " out of range");
        }
        ++counts[d.class_id];
    }
    return counts;
}

std::vector<long> count_deltas(std::span<const long> before, std::span<const long> after) {
    if (before.size() != after.size()) throw std::invalid_argument("count vectors differ in length");
    std::vector<long> d(before.size());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = after[k] - before[k];
    return d;
}

std::string format_deltas(std::span<const long> deltas, const core::ClassSet& classes) {
    std::string out = "{";
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        if (deltas[k] == 0) continue;
        if (out.size() > 1) out += ", ";
        out += classes.name(static_cast<int>(k)) + ":" + (deltas[k] > 0 ? "+" : "") + std::to_string(deltas[k]);
    }
    return out + "}";
}

std::string format_percent(double fraction) {
    // Work in hundredths of a percent; treat values within 1e-9 of .5 as ties.
    const double v = fraction * 10000.0;
    double whole = std::floor(v);
    const double rest = v - whole;
    if (std::abs(rest - 0.5) < 1e-9) {
        if (std::fmod(whole, 2.0) != 0.0) whole += 1.0;
    } else if (rest > 0.5) {
        whole += 1.0;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", whole / 100.0);
    return buf;
}

std::string format_report(const MorphologyReport& r) {
    std::ostringstream os;
    os << "morphology basis=" << to_string(r.basis) << " images=" << r.images << " analyzed_px=" << r.analyzed_px;
    if (r.fell_back_to_box) os << " warning=missing_masks_used_boxes";
    os << "\n";
    for (const auto& c : r.classes) {
        if (c.count == 0) continue;
        char mean[32];
        std::snprintf(mean, sizeof mean, "%.2f", c.mean_instance_area());
        os << c.name << ": " << format_percent(c.fraction) << "\n";
        os << c.name << ".count: " << c.count << "\n";
        os << c.name << ".mean_area_px: " << mean << "\n";
    }
    return os.str();
}

nlohmann::json to_json(const MorphologyReport& r) {
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& c : r.classes) {
        classes.push_back({{"name", c.name},
                           {"count", c.count},
                           {"area_px", c.area_px},
                           {"fraction", c.fraction},
                           {"percent", format_percent(c.fraction)},
                           {"mean_area_px", c.mean_instance_area()}});
    }
    return {{"basis", to_string(r.basis)},
            {"fell_back_to_box", r.fell_back_to_box},
            {"images", r.images},
            {"analyzed_px", r.analyzed_px},
            {"classes", classes}};
}

void emit_report(const MorphologyReport& r, const std::filesystem::path& dest) {
    std::ofstream out(dest, std::ios::binary);
    out << format_report(r);
    out.flush();
    if (!out) throw std::runtime_error("cannot write morphology report to " + dest.string());
}

}  // namespace flakelens::quantify
