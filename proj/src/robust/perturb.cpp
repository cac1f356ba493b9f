// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/robust/perturb.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace flakelens::robust {

namespace {

std::uint8_t clamp_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0)); }

double parse_number(std::string_view s, std::string_view what) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw std::invalid_argument("invalid " + std::string(what) + " '" + std::string(s) + "'");
    }
    return v;
}

void check_fraction(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
}

}  // namespace

std::string_view to_string(PerturbKind k) noexcept {
    switch (k) {
        case PerturbKind::gaussian_noise: return "gaussian_noise";
        case PerturbKind::salt_pepper: return "salt_pepper";
        case PerturbKind::brightness: return "brightness";
        case PerturbKind::downscale: return "downscale";
    }
    return "unknown";
}

PerturbKind parse_perturb_kind(std::string_view s) {
    if (s == "gaussian" || s == "gaussian_noise") return PerturbKind::gaussian_noise;
    if (s == "salt_pepper" || s == "saltpepper") return PerturbKind::salt_pepper;
    if (s == "brightness") return PerturbKind::brightness;
    if (s == "downscale") return PerturbKind::downscale;
    throw std::invalid_argument("unknown perturbation '" + std::string(s) + "'");
}

Perturbation Perturbation::gaussian(double strength, std::uint64_t seed) {
    Perturbation p;
    p.kind = PerturbKind::gaussian_noise;
    p.strength = strength;
    p.seed = seed;
    return p;
}

Perturbation Perturbation::salt_pepper(double fraction, double salt_ratio, std::uint64_t seed) {
    Perturbation p;
    p.kind = PerturbKind::salt_pepper;
    p.strength = fraction;
    p.salt_ratio = salt_ratio;
    p.seed = seed;
    return p;
}

Perturbation Perturbation::brightness(double factor) {
    Perturbation p;
    p.kind = PerturbKind::brightness;
    p.factor = factor;
    p.strength = std::min(1.0, std::abs(factor - 1.0));
    return p;
}

Perturbation Perturbation::downscale(int divisor) {
    Perturbation p;
    p.kind = PerturbKind::downscale;
    p.divisor = divisor;
    p.strength = divisor > 0 ? 1.0 / divisor : 0.0;
    return p;
}

void Perturbation::validate() const {
    check_fraction(strength, "strength");
    check_fraction(salt_ratio, "salt_ratio");
    if (kind == PerturbKind::brightness && !(factor > 0.0)) throw std::invalid_argument("factor must be positive");
    if (kind == PerturbKind::downscale && divisor < 2) throw std::invalid_argument("divisor must be at least 2");
}

double Perturbation::table_strength() const {
    switch (kind) {
        case PerturbKind::brightness: return factor - 1.0;
        case PerturbKind::downscale: return 1.0 / divisor;
        default: return strength;
    }
}

std::string Perturbation::label() const {
    std::ostringstream os;
    os << to_string(kind) << ':';
    switch (kind) {
        case PerturbKind::brightness: os << factor; break;
        case PerturbKind::downscale: os << "1/" << divisor; break;
        default: os << std::fixed << std::setprecision(2) << strength;
    }
    return os.str();
}

Perturbation parse_perturbation(std::string_view spec, std::uint64_t seed) {
    std::vector<std::string_view> parts;
    for (std::size_t start = 0;;) {
        const auto colon = spec.find(':', start);
        parts.push_back(spec.substr(start, colon - start));
        if (colon == std::string_view::npos) break;
        start = colon + 1;
    }
    const PerturbKind kind = parse_perturb_kind(parts[0]);
    auto arg = [&](std::size_t i, double fallback, std::string_view what) {
        return i < parts.size() ? parse_number(parts[i], what) : fallback;
    };
    Perturbation p;
    switch (kind) {
        case PerturbKind::gaussian_noise:
            if (parts.size() > 2) break;
            p = Perturbation::gaussian(arg(1, 0.2, "strength"), seed);
            p.validate();
            return p;
        case PerturbKind::salt_pepper:
            if (parts.size() > 3) break;
            p = Perturbation::salt_pepper(arg(1, 0.2, "fraction"), arg(2, 0.5, "salt ratio"), seed);
            p.validate();
            return p;
        case PerturbKind::brightness:
            if (parts.size() != 2) break;
            p = Perturbation::brightness(arg(1, 1.0, "factor"));
            p.validate();
            return p;
        case PerturbKind::downscale: {
            if (parts.size() != 2) break;
            const double d = arg(1, 2, "divisor");
            if (d != std::floor(d)) throw std::invalid_argument("divisor must be an integer");
            p = Perturbation::downscale(static_cast<int>(d));
            p.validate();
            return p;
        }
    }
    throw std::invalid_argument("malformed perturbation '" + std::string(spec) + "'");
}

nlohmann::json to_json(const Perturbation& p) {
    nlohmann::json j{{"kind", to_string(p.kind)}, {"strength", p.strength}, {"seed", p.seed}};
    if (p.kind == PerturbKind::salt_pepper) j["salt_ratio"] = p.salt_ratio;
    if (p.kind == PerturbKind::brightness) j["factor"] = p.factor;
    if (p.kind == PerturbKind::downscale) j["divisor"] = p.divisor;
    return j;
}

Perturbation perturbation_from_json(const nlohmann::json& j) {
    Perturbation p;
    p.kind = parse_perturb_kind(j.at("kind").get<std::string>());
    p.seed = j.value("seed", std::uint64_t{0});
    switch (p.kind) {
        case PerturbKind::gaussian_noise: p.strength = j.value("strength", 0.2); break;
        case PerturbKind::salt_pepper:
            p.strength = j.value("strength", 0.2);
            p.salt_ratio = j.value("salt_ratio", 0.5);
            break;
        case PerturbKind::brightness: p = Perturbation::brightness(j.at("factor").get<double>()); break;
        case PerturbKind::downscale: p = Perturbation::downscale(j.at("divisor").get<int>()); break;
    }
    p.seed = j.value("seed", std::uint64_t{0});
    p.validate();
    return p;
}

core::ImageBuffer apply_gaussian(const core::ImageBuffer& img, double strength, std::uint64_t seed) {
    check_fraction(strength, "strength");
    core::ImageBuffer out = img;
    if (strength == 0.0) return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, strength * 255.0);
    for (auto& v : out.data()) v = clamp_byte(v + noise(rng));
    return out;
}

core::ImageBuffer apply_salt_pepper(const core::ImageBuffer& img, double fraction, double salt_ratio,
                                    std::uint64_t seed) {
    check_fraction(fraction, "fraction");
    check_fraction(salt_ratio, "salt_ratio");
    core::ImageBuffer out = img;
    const std::size_t n = img.pixel_count();
    const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    if (count == 0) return out;
    const auto salt = static_cast<std::size_t>(std::llround(salt_ratio * static_cast<double>(count)));
    // Partial Fisher-Yates: the first `count` slots become a uniform random subset.
    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    std::mt19937_64 rng(seed);
    auto bytes = out.data();
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
        const std::uint8_t v = i < salt ? 255 : 0;
        std::fill_n(bytes.begin() + static_cast<std::ptrdiff_t>(idx[i]) * 3, 3, v);
    }
    return out;
}

core::ImageBuffer apply_brightness(const core::ImageBuffer& img, double factor) {
    if (!(factor > 0.0)) throw std::invalid_argument("brightness factor must be positive");
    std::array<std::uint8_t, 256> lut{};
    for (int v = 0; v < 256; ++v) lut[v] = clamp_byte(v * factor);
    core::ImageBuffer out = img;
    for (auto& v : out.data()) v = lut[v];
    return out;
}

core::ImageBuffer apply_downscale(const core::ImageBuffer& img, int divisor) {
    if (divisor < 2) throw std::invalid_argument("divisor must be at least 2");
    const int w = static_cast<int>(std::lround(static_cast<double>(img.width()) / divisor));
    const int h = static_cast<int>(std::lround(static_cast<double>(img.height()) / divisor));
    if (w < 8 || h < 8) {
        throw std::invalid_argument("downscaled image " + std::to_string(w) + "x" + std::to_string(h) +
                                    " is smaller than 8x8");
    }
    return core::resize_bilinear(img, w, h);
}

core::ImageBuffer apply(const core::ImageBuffer& img, const Perturbation& p) {
    p.validate();
    switch (p.kind) {
        case PerturbKind::gaussian_noise: return apply_gaussian(img, p.strength, p.seed);
        case PerturbKind::salt_pepper: return apply_salt_pepper(img, p.strength, p.salt_ratio, p.seed);
        case PerturbKind::brightness: return apply_brightness(img, p.factor);
        case PerturbKind::downscale: return apply_downscale(img, p.divisor);
    }
    return img;
}

std::vector<Perturbation> standard_battery(std::uint64_t seed) {
    return {Perturbation::gaussian(0.2, seed),  Perturbation::salt_pepper(0.2, 0.5, seed),
            Perturbation::brightness(1.2),      Perturbation::brightness(0.8),
            Perturbation::downscale(5),         Perturbation::downscale(10)};
}

nlohmann::json perturbation_conventions() {
    return {
        {"gaussian_noise", "additive per-channel noise, sigma = strength * 255, rounded and clamped"},
        {"salt_pepper", "exactly round(strength * W * H) pixels replaced; round(salt_ratio * count) white, rest black"},
        {"brightness", "multiplicative: v -> clamp(round(v * factor)); table strength = factor - 1"},
        {"downscale", "bilinear resize to round(W / divisor) x round(H / divisor), not re-upscaled; table strength = 1 / divisor"},
    };
}

}  // namespace flakelens::robust
