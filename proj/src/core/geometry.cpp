// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/core/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace flakelens::core {

NormBox NormBox::make(double cx, double cy, double w, double h) {
    if (!std::isfinite(cx) || !std::isfinite(cy) || !std::isfinite(w) || !std::isfinite(h)) {
        throw std::invalid_argument("normalized box has non-finite values");
    }
    if (w <= 0.0 || h <= 0.0) {
        throw std::invalid_argument("normalized box needs positive width and height");
    }
    return from_edges(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0);
}

NormBox NormBox::from_edges(double x0, double y0, double x1, double y1) {
    x0 = std::clamp(x0, 0.0, 1.0);
    y0 = std::clamp(y0, 0.0, 1.0);
    x1 = std::clamp(x1, 0.0, 1.0);
    y1 = std::clamp(y1, 0.0, 1.0);
    if (!(x1 > x0) || !(y1 > y0)) {
        throw std::invalid_argument("normalized box has no extent inside the image");
    }
    return NormBox((x0 + x1) / 2.0, (y0 + y1) / 2.0, x1 - x0, y1 - y0);
}

PixelBox PixelBox::make(double x0, double y0, double x1, double y1) {
    if (!(x0 < x1) || !(y0 < y1)) {
        throw std::invalid_argument("pixel box requires x0 < x1 and y0 < y1");
    }
    return {x0, y0, x1, y1};
}

PixelBox PixelBox::clamped(double width, double height) const noexcept {
    return {std::clamp(x0, 0.0, width), std::clamp(y0, 0.0, height), std::clamp(x1, 0.0, width),
            std::clamp(y1, 0.0, height)};
}

PolygonMask PolygonMask::make(std::vector<Point2> vertices) {
    if (vertices.size() < 3) {
        throw std::invalid_argument("polygon needs at least 3 vertices, got " + std::to_string(vertices.size()));
    }
    for (auto& p : vertices) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw std::invalid_argument("polygon has non-finite coordinates");
        }
        p.x = std::clamp(p.x, 0.0, 1.0);
        p.y = std::clamp(p.y, 0.0, 1.0);
    }
    return PolygonMask(std::move(vertices));
}

NormBox PolygonMask::bounding_box() const {
    double x0 = 1.0, y0 = 1.0, x1 = 0.0, y1 = 0.0;
    for (const auto& p : vertices_) {
        x0 = std::min(x0, p.x);
        y0 = std::min(y0, p.y);
        x1 = std::max(x1, p.x);
        y1 = std::max(y1, p.y);
    }
    return NormBox::from_edges(x0, y0, x1, y1);
}

double PolygonMask::area() const noexcept { return polygon_area(vertices_); }

PixelBox norm_to_pixel(const NormBox& box, int width, int height) {
    return {box.x0() * width, box.y0() * height, box.x1() * width, box.y1() * height};
}

NormBox pixel_to_norm(const PixelBox& box, int width, int height) {
    return NormBox::from_edges(box.x0 / width, box.y0 / height, box.x1 / width, box.y1 / height);
}

double intersection_area(const PixelBox& a, const PixelBox& b) noexcept {
    const double w = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
    const double h = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
    if (w <= 0.0 || h <= 0.0) {
        return 0.0;
    }
    return w * h;
}

double iou_box(const PixelBox& a, const PixelBox& b) noexcept {
    if (!a.valid() || !b.valid()) {
        return 0.0;
    }
    const double inter = intersection_area(a, b);
    if (inter <= 0.0) {
        return 0.0;
    }
    const double uni = a.area() + b.area() - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

double polygon_area(std::span<const Point2> pts) noexcept {
    if (pts.size() < 3) {
        return 0.0;
    }
    double twice = 0.0;
    for (std::size_t i = 0, j = pts.size() - 1; i < pts.size(); j = i++) {
        twice += pts[j].x * pts[i].y - pts[i].x * pts[j].y;
    }
    return std::abs(twice) / 2.0;
}

std::vector<Point2> clip_polygon(std::span<const Point2> pts, double x0, double y0, double x1, double y1) {
    std::vector<Point2> current(pts.begin(), pts.end());
    // One pass per rectangle edge: keep the half-plane where inside(p) holds.
    auto pass = [&](auto inside, auto cross) {
        if (current.empty()) {
            return;
        }
        std::vector<Point2> next;
        next.reserve(current.size() + 4);
        for (std::size_t i = 0; i < current.size(); ++i) {
            const Point2& cur = current[i];
            const Point2& prev = current[(i + current.size() - 1) % current.size()];
            const bool cin = inside(cur);
            const bool pin = inside(prev);
            if (cin) {
                if (!pin) {
                    next.push_back(cross(prev, cur));
                }
                next.push_back(cur);
            } else if (pin) {
                next.push_back(cross(prev, cur));
            }
        }
        current = std::move(next);
    };
    auto at_x = [](double x) {
        return [x](const Point2& a, const Point2& b) {
            const double t = (x - a.x) / (b.x - a.x);
            return Point2{x, a.y + t * (b.y - a.y)};
        };
    };
    auto at_y = [](double y) {
        return [y](const Point2& a, const Point2& b) {
            const double t = (y - a.y) / (b.y - a.y);
            return Point2{a.x + t * (b.x - a.x), y};
        };
    };
    pass([x0](const Point2& p) { return p.x >= x0; }, at_x(x0));
    pass([x1](const Point2& p) { return p.x <= x1; }, at_x(x1));
    pass([y0](const Point2& p) { return p.y >= y0; }, at_y(y0));
    pass([y1](const Point2& p) { return p.y <= y1; }, at_y(y1));
    return current;
}

}  // namespace flakelens::core
