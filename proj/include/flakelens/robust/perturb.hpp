// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "flakelens/core/image.hpp"

namespace flakelens::robust {

enum class PerturbKind { gaussian_noise, salt_pepper, brightness, downscale };

std::string_view to_string(PerturbKind k) noexcept;
PerturbKind parse_perturb_kind(std::string_view s);

struct Perturbation {
    PerturbKind kind = PerturbKind::gaussian_noise;
    /// Noise sigma as a fraction of 255, or the replaced-pixel fraction.
    double strength = 0.2;
    double salt_ratio = 0.5;
    /// Multiplier for brightness.
    double factor = 1.0;
    int divisor = 2;
    std::uint64_t seed = 0;

    static Perturbation gaussian(double strength, std::uint64_t seed);
    static Perturbation salt_pepper(double fraction, double salt_ratio, std::uint64_t seed);
    static Perturbation brightness(double factor);
    static Perturbation downscale(int divisor);

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
    /// Signed magnitude written to the robustness table: sigma fraction, pixel
    /// fraction, factor - 1 for brightness, 1/divisor for downscale.
    double table_strength() const;
    /// Short name such as "gaussian_noise:0.20".
    std::string label() const;

    friend bool operator==(const Perturbation&, const Perturbation&) = default;
};

/// Parses "gaussian[:strength]", "salt_pepper[:fraction[:salt_ratio]]",
/// "brightness:<factor>", "downscale:<divisor>"; seed is applied by the caller.
Perturbation parse_perturbation(std::string_view spec, std::uint64_t seed = 0);

nlohmann::json to_json(const Perturbation& p);
Perturbation perturbation_from_json(const nlohmann::json& j);

/// Additive N(0, (strength*255)^2) per channel, rounded and clamped.
core::ImageBuffer apply_gaussian(const core::ImageBuffer& img, double strength, std::uint64_t seed);
/// Replaces exactly round(fraction * W * H) distinct pixels; round(salt_ratio * that)
/// of them become white, the rest black.
core::ImageBuffer apply_salt_pepper(const core::ImageBuffer& img, double fraction, double salt_ratio,
                                    std::uint64_t seed);
/// v -> clamp(round(v * factor), 0, 255).
core::ImageBuffer apply_brightness(const core::ImageBuffer& img, double factor);
/// Bilinear resize to (round(W/d), round(H/d)); throws below 8x8.
core::ImageBuffer apply_downscale(const core::ImageBuffer& img, int divisor);

core::ImageBuffer apply(const core::ImageBuffer& img, const Perturbation& p);

/// Gaussian 20%, salt-pepper 20% (half salt), brightness x1.2 and x0.8,
/// downscale 1/5 and 1/10.
std::vector<Perturbation> standard_battery(std::uint64_t seed);

/// How each kind is parameterized, for the metadata written next to results.
nlohmann::json perturbation_conventions();

}  // namespace flakelens::robust
