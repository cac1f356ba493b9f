// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "flakelens/core/bitmask.hpp"
#include "flakelens/core/class_set.hpp"
#include "flakelens/core/geometry.hpp"
#include "flakelens/core/image.hpp"
#include "flakelens/core/image_io.hpp"
#include "flakelens/core/instance.hpp"

namespace fs = std::filesystem;
using namespace flakelens::core;

namespace {

// ---------------------------------------------------------------- image

TEST(ImageBuffer, RejectsBadDimensionsAndData) {
    EXPECT_THROW(ImageBuffer(0, 4), std::invalid_argument);
    EXPECT_THROW(ImageBuffer(2, 2, std::vector<std::uint8_t>(11)), std::invalid_argument);
    EXPECT_NO_THROW(ImageBuffer(2, 2, std::vector<std::uint8_t>(12)));
}

TEST(ImageBuffer, FilledAndAccessors) {
    ImageBuffer img = ImageBuffer::filled(3, 2, 1, 2, 3);
    EXPECT_EQ(img.pixel_count(), 6u);
    EXPECT_EQ(img.at(2, 1, 2), 3);
    img.at(1, 1, 0) = 99;
    EXPECT_EQ(img.row(1)[3], 99);
}

TEST(Resize, ConstantImageStaysConstant) {
    const ImageBuffer img = ImageBuffer::filled(37, 23, 40, 50, 60);
    for (auto [w, h] : {std::pair{100, 7}, std::pair{5, 60}, std::pair{37, 23}}) {
        EXPECT_EQ(resize_bilinear(img, w, h), ImageBuffer::filled(w, h, 40, 50, 60));
        EXPECT_EQ(resize_nearest(img, w, h), ImageBuffer::filled(w, h, 40, 50, 60));
    }
}

TEST(Resize, SameSizeIsIdentity) {
    ImageBuffer img(9, 4);
    for (std::size_t i = 0; i < img.data().size(); ++i) img.data()[i] = static_cast<std::uint8_t>(i * 13);
    EXPECT_EQ(resize_bilinear(img, 9, 4), img);
    EXPECT_EQ(resize_nearest(img, 9, 4), img);
}

TEST(Resize, BilinearHalvesByAveragingPairs) {
    // Half-pixel centers: output pixel k samples source coordinate 2k + 0.5.
    ImageBuffer img(4, 1);
    const std::uint8_t v[4] = {0, 100, 200, 50};
    for (int x = 0; x < 4; ++x) img.at(x, 0, 0) = v[x];
    const ImageBuffer out = resize_bilinear(img, 2, 1);
    EXPECT_EQ(out.at(0, 0, 0), 50);
    EXPECT_EQ(out.at(1, 0, 0), 125);
}

// ---------------------------------------------------------------- class set

TEST(ClassSet, InvariantsAndLookup) {
    EXPECT_THROW(ClassSet({}), std::invalid_argument);
    EXPECT_THROW(ClassSet({"a", "a"}), std::invalid_argument);
    EXPECT_THROW(ClassSet({"a", ""}), std::invalid_argument);
    const ClassSet c = ClassSet::from_csv(" thin, thick ,bulk");
    EXPECT_EQ(c.size(), 3u);
    EXPECT_EQ(c.name(1), "thick");
    EXPECT_EQ(c.id_of("bulk"), 2);
    EXPECT_FALSE(c.id_of("nope"));
    EXPECT_FALSE(c.contains(3));
    EXPECT_THROW(c.name(3), std::out_of_range);
}

// ---------------------------------------------------------------- boxes

TEST(NormBox, ClampsAndRejectsEmpty) {
    const NormBox b = NormBox::make(0.95, 0.5, 0.2, 0.2);
    EXPECT_NEAR(b.x1(), 1.0, 1e-12);
    EXPECT_NEAR(b.x0(), 0.85, 1e-12);
    EXPECT_THROW(NormBox::make(0.5, 0.5, 0.0, 0.1), std::invalid_argument);
    EXPECT_THROW(NormBox::make(1.5, 0.5, 0.2, 0.2), std::invalid_argument);
}

TEST(NormBox, PixelConversions) {
    EXPECT_EQ(norm_to_pixel(NormBox::make(0.5, 0.5, 1, 1), 640, 640), (PixelBox{0, 0, 640, 640}));
    EXPECT_EQ(norm_to_pixel(NormBox::make(0.5, 0.5, 0.25, 0.25), 640, 640), (PixelBox{240, 240, 400, 400}));
}

TEST(NormBox, RoundTripProperty) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> dim(1, 5000);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        double x0 = u(rng), x1 = u(rng), y0 = u(rng), y1 = u(rng);
        if (x0 > x1) std::swap(x0, x1);
        if (y0 > y1) std::swap(y0, y1);
        if (x1 - x0 < 1e-6 || y1 - y0 < 1e-6) continue;
        const NormBox b = NormBox::from_edges(x0, y0, x1, y1);
        const int w = dim(rng), h = dim(rng);
        const NormBox back = pixel_to_norm(norm_to_pixel(b, w, h), w, h);
        worst = std::max({worst, std::abs(back.cx() - b.cx()), std::abs(back.cy() - b.cy()),
                          std::abs(back.w() - b.w()), std::abs(back.h() - b.h())});
    }
    EXPECT_LE(worst, 1e-6);
}

TEST(PixelBox, MakeValidates) {
    EXPECT_THROW(PixelBox::make(1, 0, 1, 2), std::invalid_argument);
    EXPECT_EQ(PixelBox::make(0, 0, 2, 3).area(), 6.0);
    EXPECT_EQ((PixelBox{-5, 2, 20, 30}.clamped(10, 10)), (PixelBox{0, 2, 10, 10}));
}

TEST(IouBox, Examples) {
    const PixelBox a{0, 0, 2, 2};
    EXPECT_DOUBLE_EQ(iou_box(a, a), 1.0);
    EXPECT_DOUBLE_EQ(iou_box(a, {5, 5, 6, 6}), 0.0);
    EXPECT_DOUBLE_EQ(iou_box(a, {2, 0, 4, 2}), 0.0);
    EXPECT_NEAR(iou_box(a, {1, 0, 3, 2}), 1.0 / 3.0, 1e-15);
}

TEST(IouBox, AgreesWithFineGridCount) {
    // Sample both boxes on a 0.01 px grid and count cells.
    const PixelBox a{0, 0, 2, 2}, b{1, 0, 3, 2};
    long inter = 0, uni = 0;
    for (int i = 0; i < 300; ++i) {
        for (int j = 0; j < 200; ++j) {
            const double x = (i + 0.5) * 0.01, y = (j + 0.5) * 0.01;
            const bool ia = x >= a.x0 && x < a.x1 && y >= a.y0 && y < a.y1;
            const bool ib = x >= b.x0 && x < b.x1 && y >= b.y0 && y < b.y1;
            inter += ia && ib;
            uni += ia || ib;
        }
    }
    EXPECT_NEAR(iou_box(a, b), static_cast<double>(inter) / uni, 1e-12);
}

TEST(IouBox, SymmetricBoundedAndMatchesRasterIou) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> pos(0, 150), size(10, 80);
    for (int i = 0; i < 500; ++i) {
        const double ax = pos(rng), ay = pos(rng), bx = pos(rng), by = pos(rng);
        const PixelBox a{ax, ay, ax + size(rng), ay + size(rng)};
        const PixelBox b{bx, by, bx + size(rng), by + size(rng)};
        const double ab = iou_box(a, b);
        ASSERT_DOUBLE_EQ(ab, iou_box(b, a));
        ASSERT_GE(ab, 0.0);
        ASSERT_LE(ab, 1.0);
        const double raster = iou_mask(rasterize_box(a, 256, 256), rasterize_box(b, 256, 256));
        ASSERT_NEAR(ab, raster, 0.02) << i;
    }
}

// ---------------------------------------------------------------- polygons

TEST(Polygon, NeedsThreeVerticesAndClamps) {
    EXPECT_THROW(PolygonMask::make({{0, 0}, {1, 1}}), std::invalid_argument);
    const PolygonMask p = PolygonMask::make({{-0.1, 0}, {1.2, 0}, {0.5, 1}});
    EXPECT_EQ(p.vertices()[0].x, 0.0);
    EXPECT_EQ(p.vertices()[1].x, 1.0);
    EXPECT_NEAR(p.area(), 0.5, 1e-12);
}

TEST(Polygon, BoundingBox) {
    const PolygonMask p = PolygonMask::make({{0.1, 0.1}, {0.9, 0.1}, {0.5, 0.9}});
    const NormBox b = p.bounding_box();
    EXPECT_NEAR(b.cx(), 0.5, 1e-12);
    EXPECT_NEAR(b.cy(), 0.5, 1e-12);
    EXPECT_NEAR(b.w(), 0.8, 1e-12);
    EXPECT_NEAR(b.h(), 0.8, 1e-12);
}

TEST(Rasterize, UnitSquareFillsEverything) {
    const BitMask m = rasterize(PolygonMask::make({{0, 0}, {1, 0}, {1, 1}, {0, 1}}), 10, 10);
    EXPECT_EQ(m.popcount(), 100u);
}

TEST(Rasterize, TriangleAreaWithinTolerance) {
    const BitMask m = rasterize(PolygonMask::make({{0, 0}, {1, 0}, {0, 1}}), 100, 100);
    EXPECT_NEAR(static_cast<double>(m.popcount()), 5000.0, 75.0);
}

TEST(Rasterize, DegeneratePolygonIsEmpty) {
    EXPECT_FALSE(rasterize(PolygonMask::make({{0.1, 0.1}, {0.5, 0.5}, {0.9, 0.9}}), 50, 50).any());
}

TEST(Rasterize, EvenOddSelfIntersection) {
    // A bow-tie: two triangles meeting at the center, both filled.
    const std::vector<Point2> bow = {{0, 0}, {10, 10}, {10, 0}, {0, 10}};
    const BitMask m = rasterize_pixels(bow, 10, 10);
    EXPECT_TRUE(m.get(9, 5));
    EXPECT_TRUE(m.get(0, 5));
    EXPECT_FALSE(m.get(5, 0));
    EXPECT_FALSE(m.get(5, 9));
}

TEST(Rasterize, MatchesPointInPolygonOracle) {
    // Independent crossing-number test at every pixel center.
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 40);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Point2> pts(3 + trial % 6);
        for (auto& p : pts) p = {u(rng), u(rng)};
        const BitMask m = rasterize_pixels(pts, 40, 40);
        ASSERT_EQ(m, rasterize_pixels(pts, 40, 40));
        for (int y = 0; y < 40; ++y) {
            for (int x = 0; x < 40; ++x) {
                const double px = x + 0.5, py = y + 0.5;
                bool inside = false;
                for (std::size_t i = 0, j = pts.size() - 1; i < pts.size(); j = i++) {
                    if ((pts[i].y > py) != (pts[j].y > py) &&
                        px < (pts[j].x - pts[i].x) * (py - pts[i].y) / (pts[j].y - pts[i].y) + pts[i].x) {
                        inside = !inside;
                    }
                }
                ASSERT_EQ(m.get(x, y), inside) << trial << " " << x << "," << y;
            }
        }
    }
}

TEST(Rasterize, BoxUsesHalfOpenCenterRule) {
    const BitMask m = rasterize_box({0.5, 0.5, 3.5, 2.0}, 5, 5);
    EXPECT_EQ(m.popcount(), 3u * 2u);
    EXPECT_TRUE(m.get(0, 0));
    EXPECT_FALSE(m.get(3, 0));
    EXPECT_FALSE(m.get(0, 2));
}

TEST(ClipPolygon, SquareAgainstRect) {
    const std::vector<Point2> sq = {{0, 0}, {10, 0}, {10, 10}, {0, 10}};
    EXPECT_NEAR(polygon_area(clip_polygon(sq, 5, -1, 20, 4)), 20.0, 1e-12);
    EXPECT_LT(clip_polygon(sq, 20, 20, 30, 30).size(), 3u);
}

// ---------------------------------------------------------------- bitmask

TEST(BitMask, SpanPopcountBoundsMerge) {
    BitMask a(130, 3);
    a.set_span(1, 60, 70);
    EXPECT_EQ(a.popcount(), 10u);
    EXPECT_EQ(a.bounds(), (PixelBox{60, 1, 70, 2}));
    BitMask b(130, 3);
    b.set_span(1, 65, 129);
    EXPECT_EQ(a.and_count(b), 5u);
    EXPECT_EQ(a.or_count(b), 69u);
    a.merge(b);
    EXPECT_EQ(a.popcount(), 69u);
    EXPECT_THROW(a.merge(BitMask(3, 3)), std::invalid_argument);
}

TEST(BitMask, BoundsMatchesPixelScan) {
    std::mt19937 rng(11);
    for (int w : {1, 3, 63, 64, 65, 130}) {
        for (int trial = 0; trial < 40; ++trial) {
            const int h = 1 + static_cast<int>(rng() % 9);
            BitMask m(w, h);
            const int bits = static_cast<int>(rng() % 6);
            for (int k = 0; k < bits; ++k) m.set(static_cast<int>(rng() % w), static_cast<int>(rng() % h));
            int x0 = w, y0 = h, x1 = -1, y1 = -1;
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    if (m.get(x, y)) x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
                }
            }
            const PixelBox expected = x1 < 0 ? PixelBox{} : PixelBox{double(x0), double(y0), double(x1 + 1), double(y1 + 1)};
            EXPECT_EQ(m.bounds(), expected) << w << "x" << h;
        }
    }
}

TEST(IouMask, Examples) {
    BitMask left(10, 10), right(10, 10);
    for (int y = 0; y < 10; ++y) {
        left.set_span(y, 0, 5);
        right.set_span(y, 5, 10);
    }
    EXPECT_DOUBLE_EQ(iou_mask(left, left), 1.0);
    EXPECT_DOUBLE_EQ(iou_mask(left, right), 0.0);
    EXPECT_DOUBLE_EQ(iou_mask(BitMask(4, 4), BitMask(4, 4)), 0.0);
    // Stripes [0,6) and [3,9): overlap 3 columns of 9.
    BitMask s1(10, 10), s2(10, 10);
    for (int y = 0; y < 10; ++y) {
        s1.set_span(y, 0, 6);
        s2.set_span(y, 3, 9);
    }
    EXPECT_DOUBLE_EQ(iou_mask(s1, s2), 1.0 / 3.0);
    EXPECT_THROW(iou_mask(s1, BitMask(5, 5)), std::invalid_argument);
}

// ---------------------------------------------------------------- instances

TEST(Instance, FromPolygonUsesBoundingBox) {
    const Instance inst = Instance::from_polygon(1, PolygonMask::make({{0.1, 0.1}, {0.9, 0.1}, {0.5, 0.9}}));
    EXPECT_EQ(inst.class_id, 1);
    EXPECT_NEAR(inst.box.w(), 0.8, 1e-12);
    ASSERT_TRUE(inst.mask);
}

// ---------------------------------------------------------------- io

TEST(ImageIo, PngRoundTripAndJpegDims) {
    ImageBuffer img(7, 5);
    for (std::size_t i = 0; i < img.data().size(); ++i) img.data()[i] = static_cast<std::uint8_t>(i * 7);
    const fs::path dir = fs::temp_directory_path() / "flakelens_core_io";
    fs::create_directories(dir);
    save_image(img, dir / "a.png");
    EXPECT_EQ(load_image(dir / "a.png"), img);
    const ImageBuffer j = decode_image(encode_jpeg(img, 90));
    EXPECT_EQ(j.width(), 7);
    EXPECT_EQ(j.height(), 5);
    EXPECT_THROW(load_image(dir / "missing.png"), ImageIoError);
    std::ofstream(dir / "notes.txt") << "x";
    EXPECT_EQ(list_images(dir), std::vector<fs::path>{dir / "a.png"});
    fs::remove_all(dir);
}

}  // namespace
