// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/rtserve/frame_source.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <condition_variable>
#include <mutex>
#include <random>

#include "flakelens/core/bitmask.hpp"
#include "flakelens/core/image_io.hpp"

namespace flakelens::rtserve {

namespace fs = std::filesystem;

PacedSource::PacedSource(double fps) : fps_(fps) {
    if (!std::isfinite(fps)) throw SourceError("frame rate must be finite");
}

std::optional<FramePacket> PacedSource::next(std::stop_token stop) {
    if (exhausted_ || stop.stop_requested()) return std::nullopt;
    const auto now = Clock::now();
    if (!start_) start_ = now;
    if (fps_ > 0.0) {
        const auto deadline = *start_ + std::chrono::duration_cast<Clock::duration>(
                                            std::chrono::duration<double>(static_cast<double>(index_) / fps_));
        if (deadline > now) {
            std::mutex m;
            std::condition_variable_any cv;
            std::unique_lock lock(m);
            cv.wait_until(lock, stop, deadline, [] { return false; });
            if (stop.stop_requested()) return std::nullopt;
        }
    }
    std::optional<core::ImageBuffer> img = produce(index_);
    if (!img) {
        exhausted_ = true;
        return std::nullopt;
    }
    ++index_;
    return FramePacket{index_, now_ns(), std::move(*img)};
}

DirectorySource::DirectorySource(fs::path dir, double fps) : PacedSource(fps), dir_(std::move(dir)) {
    if (!fs::is_directory(dir_)) throw SourceError("frame directory not found: " + dir_.string());
    files_ = core::list_images(dir_);
}

std::string DirectorySource::describe() const {
    return "dir:" + dir_.string() + "@" + std::to_string(fps());
}

std::optional<core::ImageBuffer> DirectorySource::produce(std::uint64_t index) {
    if (index >= files_.size()) return std::nullopt;
    return core::load_image(files_[index]);
}

namespace {

constexpr std::size_t kRingSize = 16;

core::ImageBuffer render_flakes(int w, int h, std::uint64_t seed, std::size_t phase) {
    core::ImageBuffer img(w, h);
    // Substrate: a soft violet-gray gradient like SiO2/Si under a microscope.
    for (int y = 0; y < h; ++y) {
        auto row = img.row(y);
        for (int x = 0; x < w; ++x) {
            const int t = (x * 40) / w + (y * 20) / h;
            row[3 * x] = static_cast<std::uint8_t>(120 + t);
            row[3 * x + 1] = static_cast<std::uint8_t>(100 + t / 2);
            row[3 * x + 2] = static_cast<std::uint8_t>(150 + t);
        }
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(0.05, 0.95), us(0.02, 0.08), ua(0, 6.283185307179586);
    const double scale = std::min(w, h);
    for (int k = 0; k < 12; ++k) {
        const double cx = ux(rng) * w + 3.0 * static_cast<double>(phase), cy = ux(rng) * h;
        const double r = us(rng) * scale, a0 = ua(rng);
        const int sides = k % 3 == 0 ? 6 : 3;
        std::vector<core::Point2> pts;
        for (int i = 0; i < sides; ++i) {
            const double a = a0 + 6.283185307179586 * i / sides;
            pts.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
        }
        const core::BitMask m = core::rasterize_pixels(pts, w, h);
        const std::uint8_t shade = static_cast<std::uint8_t>(60 + 25 * (k % 4));
        const int bx0 = std::max(0, static_cast<int>(cx - r) - 1), bx1 = std::min(w, static_cast<int>(cx + r) + 2);
        const int by0 = std::max(0, static_cast<int>(cy - r) - 1), by1 = std::min(h, static_cast<int>(cy + r) + 2);
        for (int y = by0; y < by1; ++y) {
            for (int x = bx0; x < bx1; ++x) {
                if (!m.get(x, y)) continue;
                img.at(x, y, 0) = shade;
                img.at(x, y, 1) = static_cast<std::uint8_t>(shade + 20);
                img.at(x, y, 2) = static_cast<std::uint8_t>(shade + 60);
            }
        }
    }
    return img;
}

}  // namespace

SyntheticSource::SyntheticSource(SyntheticOptions options) : PacedSource(options.fps), options_(std::move(options)) {
    if (options_.width < 8 || options_.height < 8) throw SourceError("synthetic frames must be at least 8x8");
    const int w = options_.width, h = options_.height;
    if (options_.preset == "gray") {
        ring_.push_back(core::ImageBuffer::filled(w, h, 128, 128, 128));
    } else if (options_.preset == "noise") {
        std::mt19937_64 rng(options_.seed);
        for (std::size_t i = 0; i < kRingSize; ++i) {
            core::ImageBuffer img(w, h);
            for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng());
            ring_.push_back(std::move(img));
        }
    } else if (options_.preset == "flakes") {
        for (std::size_t i = 0; i < kRingSize; ++i) ring_.push_back(render_flakes(w, h, options_.seed, i));
    } else {
        throw SourceError("unknown synthetic preset '" + options_.preset + "' (flakes, gray, noise)");
    }
}

std::string SyntheticSource::describe() const {
    return "synthetic:" + options_.preset + "@" + std::to_string(fps()) + "?size=" + std::to_string(options_.width) +
           "x" + std::to_string(options_.height);
}

std::optional<core::ImageBuffer> SyntheticSource::produce(std::uint64_t index) {
    if (options_.frames != 0 && index >= options_.frames) return std::nullopt;
    return ring_[index % ring_.size()];
}

namespace {

template <typename T>
T parse_num(std::string_view s, std::string_view what) {
    T v{};
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw SourceError("invalid " + std::string(what) + " '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace

std::unique_ptr<FrameSource> make_source(std::string_view spec) {
    const auto colon = spec.find(':');
    if (colon == std::string_view::npos) throw SourceError("source must look like kind:args, got '" + std::string(spec) + "'");
    const std::string_view kind = spec.substr(0, colon);
    std::string_view rest = spec.substr(colon + 1);

    if (kind == "dir") {
        const auto at = rest.rfind('@');
        if (at == std::string_view::npos) throw SourceError("directory source needs a rate: dir:<path>@<fps>");
        const double fps = parse_num<double>(rest.substr(at + 1), "frame rate");
        if (fps <= 0.0) throw SourceError("frame rate must be positive");
        return std::make_unique<DirectorySource>(fs::path(std::string(rest.substr(0, at))), fps);
    }
    if (kind == "synthetic") {
        SyntheticOptions o;
        std::string_view query;
        if (const auto q = rest.find('?'); q != std::string_view::npos) {
            query = rest.substr(q + 1);
            rest = rest.substr(0, q);
        }
        if (const auto at = rest.find('@'); at != std::string_view::npos) {
            o.fps = parse_num<double>(rest.substr(at + 1), "frame rate");
            if (o.fps <= 0.0) throw SourceError("frame rate must be positive");
            rest = rest.substr(0, at);
        }
        if (!rest.empty()) o.preset = std::string(rest);
        while (!query.empty()) {
            const auto amp = query.find('&');
            const std::string_view item = query.substr(0, amp);
            query = amp == std::string_view::npos ? std::string_view{} : query.substr(amp + 1);
            const auto eq = item.find('=');
            if (eq == std::string_view::npos) throw SourceError("malformed option '" + std::string(item) + "'");
            const std::string_view key = item.substr(0, eq), value = item.substr(eq + 1);
            if (key == "frames") {
                o.frames = parse_num<std::uint64_t>(value, "frame count");
            } else if (key == "seed") {
                o.seed = parse_num<std::uint64_t>(value, "seed");
            } else if (key == "size") {
                const auto x = value.find('x');
                if (x == std::string_view::npos) throw SourceError("size must be WxH");
                o.width = parse_num<int>(value.substr(0, x), "width");
                o.height = parse_num<int>(value.substr(x + 1), "height");
            } else {
                throw SourceError("unknown synthetic option '" + std::string(key) + "'");
            }
        }
        return std::make_unique<SyntheticSource>(std::move(o));
    }
    if (kind == "screen") {
        throw SourceError("screen capture is not available in this build; use dir: or synthetic: sources");
    }
    throw SourceError("unknown source kind '" + std::string(kind) + "'");
}

}  // namespace flakelens::rtserve
