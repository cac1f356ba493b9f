// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/rtserve/annotate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include <opencv2/imgproc.hpp>

namespace flakelens::rtserve {

namespace {

constexpr std::array<Rgb, 10> kPalette = {{
    {255, 56, 56},
    {50, 205, 50},
    {30, 144, 255},
    {255, 178, 29},
    {207, 73, 255},
    {0, 212, 187},
    {255, 112, 31},
    {146, 204, 23},
    {255, 55, 199},
    {72, 249, 10},
}};

}  // namespace

Rgb class_color(int class_id) noexcept {
    const auto n = static_cast<int>(kPalette.size());
    return kPalette[static_cast<std::size_t>(((class_id % n) + n) % n)];
}

PixelRect pixel_rect(const core::PixelBox& box, int width, int height) noexcept {
    auto span = [](double lo, double hi, int limit) {
        const int b = std::clamp(static_cast<int>(std::ceil(lo - 0.5)), 0, limit);
        const int e = std::clamp(static_cast<int>(std::ceil(hi - 0.5)), 0, limit);
        return std::pair{b, e};
    };
    const auto [x0, x1] = span(box.x0, box.x1, width);
    const auto [y0, y1] = span(box.y0, box.y1, height);
    return {x0, y0, x1, y1};
}

core::ImageBuffer annotate_frame(const core::ImageBuffer& img, std::span<const core::Detection> dets,
                                 const OverlayOptions& overlay, const core::ClassSet& classes) {
    core::ImageBuffer out = img;
    if (dets.empty()) return out;
    const int w = img.width(), h = img.height();

    if (overlay.masks) {
        for (const auto& d : dets) {
            if (!d.mask || d.mask->width() != w || d.mask->height() != h) continue;
            const Rgb c = class_color(d.class_id);
            std::array<std::array<std::uint8_t, 256>, 3> blend;
            for (int ch = 0; ch < 3; ++ch) {
                for (int v = 0; v < 256; ++v) {
                    blend[ch][v] = static_cast<std::uint8_t>(std::lround(0.6 * v + 0.4 * c[ch]));
                }
            }
            const PixelRect r = pixel_rect(d.mask->bounds(), w, h);
            for (int y = r.y0; y < r.y1; ++y) {
                auto row = out.row(y);
                for (int x = r.x0; x < r.x1; ++x) {
                    if (!d.mask->get(x, y)) continue;
                    std::uint8_t* px = row.data() + static_cast<std::size_t>(x) * 3;
                    for (int ch = 0; ch < 3; ++ch) px[ch] = blend[ch][px[ch]];
                }
            }
        }
    }

    if (overlay.boxes) {
        for (const auto& d : dets) {
            const Rgb c = class_color(d.class_id);
            const PixelRect r = pixel_rect(d.box, w, h);
            for (int y = r.y0; y < r.y1; ++y) {
                const bool edge_row = y < r.y0 + 2 || y >= r.y1 - 2;
                for (int x = r.x0; x < r.x1; ++x) {
                    if (!edge_row && x >= r.x0 + 2 && x < r.x1 - 2) continue;
                    for (int ch = 0; ch < 3; ++ch) out.at(x, y, ch) = c[ch];
                }
            }
        }
    }

    if (overlay.labels || overlay.confidences) {
        cv::Mat mat(h, w, CV_8UC3, out.data().data());
        for (const auto& d : dets) {
            std::string text;
            if (overlay.labels) {
                text = classes.contains(d.class_id) ? classes.name(d.class_id) : "class_" + std::to_string(d.class_id);
            }
            if (overlay.confidences) {
                char buf[16];
                std::snprintf(buf, sizeof buf, "%.2f", d.confidence);
                text += (text.empty() ? "" : " ") + std::string(buf);
            }
            const PixelRect r = pixel_rect(d.box, w, h);
            int baseline = 0;
            const cv::Size size = cv::getTextSize(text, cv::FONT_HERSHEY_SIMPLEX, 0.45, 1, &baseline);
            const int top = r.y0 - size.height - baseline - 2 >= 0 ? r.y0 - size.height - baseline - 2 : r.y0;
            const Rgb c = class_color(d.class_id);
            const cv::Rect bg(r.x0, top, size.width + 4, size.height + baseline + 2);
            cv::rectangle(mat, bg & cv::Rect(0, 0, w, h), cv::Scalar(c[0], c[1], c[2]), cv::FILLED, cv::LINE_8);
            cv::putText(mat, text, cv::Point(r.x0 + 2, top + size.height + 1), cv::FONT_HERSHEY_SIMPLEX, 0.45,
                        cv::Scalar(255, 255, 255), 1, cv::LINE_8);
        }
    }
    return out;
}

}  // namespace flakelens::rtserve
