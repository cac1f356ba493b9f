// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/dataset/augment.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <random>
#include <stdexcept>

namespace flakelens::dataset {

using core::ImageBuffer;
using core::Instance;
using core::Point2;

namespace {

struct KindName {
    AugmentKind kind;
    std::string_view name;
    double default_amount;
    double max_amount;
};

constexpr std::array<KindName, 8> kKinds = {{
    {AugmentKind::hflip, "hflip", 0.0, 0.0},
    {AugmentKind::vflip, "vflip", 0.0, 0.0},
    {AugmentKind::rot90, "rot90", 0.0, 0.0},
    {AugmentKind::rot180, "rot180", 0.0, 0.0},
    {AugmentKind::rot270, "rot270", 0.0, 0.0},
    {AugmentKind::brightness, "brightness", 0.2, 0.2},
    {AugmentKind::contrast, "contrast", 0.2, 0.2},
    {AugmentKind::noise, "noise", 0.1, 0.1},
}};

const KindName& info(AugmentKind kind) {
    return *std::find_if(kKinds.begin(), kKinds.end(), [kind](const KindName& k) { return k.kind == kind; });
}

// Normalized point transform; rotations are clockwise.
Point2 map_point(Point2 p, AugmentKind kind) {
    switch (kind) {
        case AugmentKind::hflip:
            return {1.0 - p.x, p.y};
        case AugmentKind::vflip:
            return {p.x, 1.0 - p.y};
        case AugmentKind::rot90:
            return {1.0 - p.y, p.x};
        case AugmentKind::rot180:
            return {1.0 - p.x, 1.0 - p.y};
        case AugmentKind::rot270:
            return {p.y, 1.0 - p.x};
        default:
            return p;
    }
}

std::uint8_t clamp_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

}  // namespace

bool is_geometric(AugmentKind kind) noexcept {
    return kind == AugmentKind::hflip || kind == AugmentKind::vflip || kind == AugmentKind::rot90 ||
           kind == AugmentKind::rot180 || kind == AugmentKind::rot270;
}

AugmentOp parse_augment_op(std::string_view text) {
    const std::size_t colon = text.find(':');
    const std::string_view name = text.substr(0, colon);
    const auto it = std::find_if(kKinds.begin(), kKinds.end(), [name](const KindName& k) { return k.name == name; });
    if (it == kKinds.end()) {
        throw std::invalid_argument("unknown augmentation '" + std::string(name) + "'");
    }
    AugmentOp op{it->kind, it->default_amount};
    if (colon != std::string_view::npos) {
        const std::string_view arg = text.substr(colon + 1);
        if (is_geometric(it->kind)) {
            throw std::invalid_argument("augmentation '" + std::string(name) + "' takes no amount");
        }
        const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), op.amount);
        if (ec != std::errc{} || ptr != arg.data() + arg.size()) {
            throw std::invalid_argument("bad amount '" + std::string(arg) + "' for " + std::string(name));
        }
    }
    if (op.amount < 0.0 || op.amount > it->max_amount) {
        throw std::invalid_argument("amount for " + std::string(name) + " must be in [0, " +
                                    std::to_string(it->max_amount) + "]");
    }
    return op;
}

std::string to_string(const AugmentOp& op) {
    std::string s(info(op.kind).name);
    if (!is_geometric(op.kind)) {
        char buf[32];
        std::snprintf(buf, sizeof buf, ":%g", op.amount);
        s += buf;
    }
    return s;
}

Instance transform_instance(const Instance& inst, AugmentKind kind) {
    if (!is_geometric(kind)) {
        return inst;
    }
    const bool flips = kind == AugmentKind::hflip || kind == AugmentKind::vflip;
    Instance out;
    out.class_id = inst.class_id;
    const Point2 a = map_point({inst.box.x0(), inst.box.y0()}, kind);
    const Point2 b = map_point({inst.box.x1(), inst.box.y1()}, kind);
    out.box = core::NormBox::from_edges(std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x),
                                        std::max(a.y, b.y));
    if (inst.mask) {
        std::vector<Point2> pts;
        pts.reserve(inst.mask->size());
        for (const auto& p : inst.mask->vertices()) {
            pts.push_back(map_point(p, kind));
        }
        if (flips) {
            std::reverse(pts.begin(), pts.end());
        }
        out.mask = core::PolygonMask::make(std::move(pts));
    }
    return out;
}

ImageBuffer transform_image(const ImageBuffer& img, AugmentKind kind) {
    if (!is_geometric(kind)) {
        return img;
    }
    const int w = img.width(), h = img.height();
    const bool swap = kind == AugmentKind::rot90 || kind == AugmentKind::rot270;
    ImageBuffer out(swap ? h : w, swap ? w : h);
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            int sx = x, sy = y;
            switch (kind) {
                case AugmentKind::hflip: sx = w - 1 - x; break;
                case AugmentKind::vflip: sy = h - 1 - y; break;
                case AugmentKind::rot90: sx = y; sy = h - 1 - x; break;
                case AugmentKind::rot180: sx = w - 1 - x; sy = h - 1 - y; break;
                case AugmentKind::rot270: sx = w - 1 - y; sy = x; break;
                default: break;
            }
            for (int c = 0; c < 3; ++c) {
                out.at(x, y, c) = img.at(sx, sy, c);
            }
        }
    }
    return out;
}

std::vector<LabeledExample> augment(const LabeledExample& example, std::span<const AugmentOp> ops,
                                    std::uint64_t seed) {
    std::vector<LabeledExample> out;
    out.reserve(ops.size());
    for (std::size_t k = 0; k < ops.size(); ++k) {
        const AugmentOp& op = ops[k];
        std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * (k + 1));
        LabeledExample ex{example.image, {}, example.source_id, example.offset};
        if (is_geometric(op.kind)) {
            ex.image = transform_image(example.image, op.kind);
            ex.instances.reserve(example.instances.size());
            for (const auto& inst : example.instances) {
                ex.instances.push_back(transform_instance(inst, op.kind));
            }
        } else {
            ex.instances = example.instances;
            auto bytes = ex.image.data();
            if (op.kind == AugmentKind::brightness) {
                const double factor = 1.0 + std::uniform_real_distribution<double>(-op.amount, op.amount)(rng);
                for (auto& v : bytes) {
                    v = clamp_u8(v * factor);
                }
            } else if (op.kind == AugmentKind::contrast) {
                const double factor = 1.0 + std::uniform_real_distribution<double>(-op.amount, op.amount)(rng);
                double mean = 0.0;
                for (auto v : bytes) {
                    mean += v;
                }
                mean /= static_cast<double>(bytes.size());
                for (auto& v : bytes) {
                    v = clamp_u8((v - mean) * factor + mean);
                }
            } else {
                std::normal_distribution<double> noise(0.0, op.amount * 255.0);
                for (auto& v : bytes) {
                    v = clamp_u8(v + noise(rng));
                }
            }
        }
        out.push_back(std::move(ex));
    }
    return out;
}

}  // namespace flakelens::dataset
