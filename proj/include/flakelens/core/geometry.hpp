// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

namespace flakelens::core {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point2&, const Point2&) = default;
};

/// Box in normalized center form. All values are fractions of the image size.
///
/// Construction through make() clamps the box edges to [0, 1]; a box with no
/// remaining extent is rejected.
class NormBox {
public:
    static NormBox make(double cx, double cy, double w, double h);
    static NormBox from_edges(double x0, double y0, double x1, double y1);

    double cx() const noexcept { return cx_; }
    double cy() const noexcept { return cy_; }
    double w() const noexcept { return w_; }
    double h() const noexcept { return h_; }
    double x0() const noexcept { return cx_ - w_ / 2.0; }
    double y0() const noexcept { return cy_ - h_ / 2.0; }
    double x1() const noexcept { return cx_ + w_ / 2.0; }
    double y1() const noexcept { return cy_ + h_ / 2.0; }

    friend bool operator==(const NormBox&, const NormBox&) = default;

private:
    NormBox(double cx, double cy, double w, double h) : cx_(cx), cy_(cy), w_(w), h_(h) {}
    double cx_ = 0.5, cy_ = 0.5, w_ = 1.0, h_ = 1.0;
};

/// Axis-aligned box in pixel coordinates, x0 < x1 and y0 < y1.
struct PixelBox {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;

    /// Throws std::invalid_argument unless x0 < x1 and y0 < y1.
    static PixelBox make(double x0, double y0, double x1, double y1);

    double width() const noexcept { return x1 - x0; }
    double height() const noexcept { return y1 - y0; }
    double area() const noexcept { return width() * height(); }
    bool valid() const noexcept { return x0 < x1 && y0 < y1; }

    /// Clamps to [0, width] x [0, height]. The result may be degenerate.
    PixelBox clamped(double width, double height) const noexcept;

    friend bool operator==(const PixelBox&, const PixelBox&) = default;
};

/// Closed polygon in normalized coordinates with at least three vertices.
class PolygonMask {
public:
    /// Clamps every coordinate into [0, 1]. Throws std::invalid_argument for < 3 vertices.
    static PolygonMask make(std::vector<Point2> vertices);

    std::span<const Point2> vertices() const noexcept { return vertices_; }
    std::size_t size() const noexcept { return vertices_.size(); }

    /// Tight bounding box; throws when the polygon has no extent on an axis.
    NormBox bounding_box() const;
    /// Signed-area magnitude in normalized units.
    double area() const noexcept;

    friend bool operator==(const PolygonMask&, const PolygonMask&) = default;

private:
    explicit PolygonMask(std::vector<Point2> v) : vertices_(std::move(v)) {}
    std::vector<Point2> vertices_;
};

PixelBox norm_to_pixel(const NormBox& box, int width, int height);
NormBox pixel_to_norm(const PixelBox& box, int width, int height);

double intersection_area(const PixelBox& a, const PixelBox& b) noexcept;
/// Intersection over union of two boxes; 0 when disjoint or when either is degenerate.
double iou_box(const PixelBox& a, const PixelBox& b) noexcept;

/// Shoelace area of a closed polygon given in any consistent unit.
double polygon_area(std::span<const Point2> pts) noexcept;

/// Clips a polygon against an axis-aligned rectangle (Sutherland-Hodgman).
/// May return fewer than three points when nothing remains.
std::vector<Point2> clip_polygon(std::span<const Point2> pts, double x0, double y0, double x1, double y1);

}  // namespace flakelens::core
