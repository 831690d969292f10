// SPDX-License-Identifier: Apache-2.0
//
// metamatch: programmable media-matching metasurface simulator
// Copyright (C) 2026 The metamatch authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef METAMATCH_MEDIA_HPP
#define METAMATCH_MEDIA_HPP

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "metamatch/errors.hpp"

namespace metamatch {

using complex = std::complex<double>;

inline constexpr double kVacuumPermittivity = 8.8541878128e-12;  // F/m
inline constexpr double kFreeSpaceImpedance = 376.730313668;     // ohm
inline constexpr double kSpeedOfLight = 299792458.0;             // m/s
inline constexpr double kDefaultFrequency = 2.4e9;               // Hz

inline constexpr complex j{0.0, 1.0};

inline double angular_frequency(double frequency) {
    if (!(frequency > 0.0) || !std::isfinite(frequency))
        throw invalid_argument("frequency must be positive and finite");
    return 2.0 * std::numbers::pi * frequency;
}

/// Isotropic, non-dispersive medium. Time convention is e^{+jwt}.
struct Medium {
    std::string name;
    double relative_permittivity = 1.0;
    double relative_permeability = 1.0;
    double conductivity = 0.0;  // S/m

    bool lossless() const { return conductivity == 0.0; }
};

inline void validate(const Medium& m) {
    if (!(m.relative_permittivity >= 1.0) || !std::isfinite(m.relative_permittivity))
        throw invalid_argument("medium '" + m.name + "': relative permittivity must be >= 1");
    if (!(m.relative_permeability > 0.0) || !std::isfinite(m.relative_permeability))
        throw invalid_argument("medium '" + m.name + "': relative permeability must be > 0");
    if (!(m.conductivity >= 0.0) || !std::isfinite(m.conductivity))
        throw invalid_argument("medium '" + m.name + "': conductivity must be >= 0");
}

/// Slab of a medium with finite thickness in meters.
struct Layer {
    Medium medium;
    double thickness = 0.0;
};

inline void validate(const Layer& layer) {
    validate(layer.medium);
    if (!(layer.thickness > 0.0) || !std::isfinite(layer.thickness))
        throw invalid_argument("layer '" + layer.medium.name + "': thickness must be > 0 and finite");
}

namespace media {

// Built-in table at 2.4 GHz with conductivity switched off.
inline Medium air() { return {"air", 1.0, 1.0, 0.0}; }
inline Medium water() { return {"water", 81.0, 1.0, 0.0}; }
inline Medium skin() { return {"skin", 43.75, 1.0, 0.0}; }
inline Medium fat() { return {"fat", 5.46, 1.0, 0.0}; }
inline Medium muscle() { return {"muscle", 55.03, 1.0, 0.0}; }

inline std::optional<Medium> find(std::string_view name) {
    for (auto m : {air(), water(), skin(), fat(), muscle()})
        if (m.name == name) return m;
    return std::nullopt;
}

inline Medium with_conductivity(Medium m, double sigma) {
    m.conductivity = sigma;
    validate(m);
    return m;
}

}  // namespace media

/// eps_r - j sigma / (w eps_0).
inline complex complex_permittivity(const Medium& m, double frequency) {
    const double w = angular_frequency(frequency);
    validate(m);
    return {m.relative_permittivity, -m.conductivity / (w * kVacuumPermittivity)};
}

/// Z_0 sqrt(mu_r / eps_c), principal root (Re > 0).
inline complex intrinsic_impedance(const Medium& m, double frequency) {
    const complex eps = complex_permittivity(m, frequency);
    return kFreeSpaceImpedance * std::sqrt(complex(m.relative_permeability) / eps);
}

/// Complex wavenumber k = beta - j alpha, so that e^{-jkz} decays for lossy media.
inline complex phase_constant(const Medium& m, double frequency) {
    const complex eps = complex_permittivity(m, frequency);
    const double w = angular_frequency(frequency);
    return (w / kSpeedOfLight) * std::sqrt(m.relative_permeability * eps);
}

// Fraction of incident power flux carried by a wave of field ratio `t` from
// a medium of impedance z_src into one of impedance z_dst.
inline double power_ratio(complex t, complex z_src, complex z_dst) {
    return std::norm(t) * std::real(1.0 / z_dst) / std::real(1.0 / z_src);
}

struct FresnelResult {
    complex gamma;
    complex t;
    double reflected_power = 0.0;
    double through_power = 0.0;
};

inline FresnelResult fresnel_interface(const Medium& src, const Medium& dst, double frequency) {
    const complex z_src = intrinsic_impedance(src, frequency);
    const complex z_dst = intrinsic_impedance(dst, frequency);
    FresnelResult r;
    r.gamma = (z_dst - z_src) / (z_dst + z_src);
    r.t = 1.0 + r.gamma;
    r.reflected_power = std::norm(r.gamma);
    r.through_power = power_ratio(r.t, z_src, z_dst);
    return r;
}

}  // namespace metamatch

#endif  // METAMATCH_MEDIA_HPP
