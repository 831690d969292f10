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

#ifndef METAMATCH_CASCADE_HPP
#define METAMATCH_CASCADE_HPP

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "metamatch/media.hpp"

namespace metamatch {

/// 2x2 transmission matrix: [E_in; H_in] = [[a, b], [c, d]] [E_out; H_out].
struct AbcdMatrix {
    complex a{1.0}, b{0.0}, c{0.0}, d{1.0};

    static AbcdMatrix identity() { return {}; }

    complex det() const { return a * d - b * c; }

    friend AbcdMatrix operator*(const AbcdMatrix& l, const AbcdMatrix& r) {
        return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d,
                l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
    }
};

inline AbcdMatrix shunt_abcd(complex admittance) {
    if (!std::isfinite(admittance.real()) || !std::isfinite(admittance.imag()))
        throw invalid_argument("shunt admittance must be finite");
    return {1.0, 0.0, admittance, 1.0};
}

inline AbcdMatrix line_abcd(const Layer& layer, double frequency) {
    validate(layer);
    const complex bl = phase_constant(layer.medium, frequency) * layer.thickness;
    const complex z = intrinsic_impedance(layer.medium, frequency);
    const complex cs = std::cos(bl);
    const complex sn = std::sin(bl);
    return {cs, j * z * sn, j * sn / z, cs};
}

/// Product in propagation order, source side first.
inline AbcdMatrix cascade(std::span<const AbcdMatrix> matrices) {
    if (matrices.empty()) throw invalid_argument("cascade of an empty list");
    AbcdMatrix acc = matrices.front();
    for (const auto& m : matrices.subspan(1)) acc = acc * m;
    return acc;
}

/// Source half-space | layers (shunt surface inserted before layers[surface_index]) | load half-space.
struct StackSpec {
    Medium source_medium = media::air();
    std::vector<Layer> layers;
    Medium load_medium = media::air();
    std::size_t surface_index = 0;
};

inline void validate(const StackSpec& s) {
    validate(s.source_medium);
    validate(s.load_medium);
    for (const auto& l : s.layers) validate(l);
    if (s.surface_index > s.layers.size())
        throw invalid_argument("surface index past the last layer");
}

/// The same physical stack seen from the load side.
inline StackSpec reversed(const StackSpec& s) {
    StackSpec r;
    r.source_medium = s.load_medium;
    r.load_medium = s.source_medium;
    r.layers.assign(s.layers.rbegin(), s.layers.rend());
    r.surface_index = s.layers.size() - s.surface_index;
    return r;
}

namespace stacks {

// Surface | air gap | water half-space.
inline StackSpec air_water(double gap_m = 6e-3) {
    return {media::air(), {{media::air(), gap_m}}, media::water(), 0};
}

// Surface | air gap | skin | fat | muscle half-space.
inline StackSpec air_tissue(double gap_m = 6e-3, double fat_m = 15e-3, double skin_m = 2.5e-3) {
    return {media::air(),
            {{media::air(), gap_m}, {media::skin(), skin_m}, {media::fat(), fat_m}},
            media::muscle(),
            0};
}

}  // namespace stacks

struct CascadeSolution {
    complex t;      // E_4+ / E_0+
    complex gamma;  // E_0- / E_0+
    double through_power = 0.0;
    double reflected_power = 0.0;
};

inline constexpr double kSingularDenominator = 1e-12;

inline AbcdMatrix stack_abcd(const StackSpec& stack, complex surface_admittance, double frequency) {
    validate(stack);
    std::vector<AbcdMatrix> chain;
    chain.reserve(stack.layers.size() + 1);
    for (std::size_t k = 0; k <= stack.layers.size(); ++k) {
        if (k == stack.surface_index) chain.push_back(shunt_abcd(surface_admittance));
        if (k < stack.layers.size()) chain.push_back(line_abcd(stack.layers[k], frequency));
    }
    return cascade(chain);
}

inline CascadeSolution solve_stack(const StackSpec& stack, complex surface_admittance,
                                   double frequency) {
    const AbcdMatrix m = stack_abcd(stack, surface_admittance, frequency);
    const complex z0 = intrinsic_impedance(stack.source_medium, frequency);
    const complex z4 = intrinsic_impedance(stack.load_medium, frequency);

    const complex fwd = m.a + m.b / z4;
    const complex back = m.c * z0 + m.d * z0 / z4;
    const complex den = fwd + back;
    if (std::abs(den) < kSingularDenominator)
        throw degenerate_stack_error("cascade denominator vanishes (resonance singularity)");

    CascadeSolution s;
    s.t = 2.0 / den;
    s.gamma = (fwd - back) / den;
    s.through_power = power_ratio(s.t, z0, z4);
    s.reflected_power = std::norm(s.gamma);
    return s;
}

/// Through power that reaches `depth` metres into the load half-space (decays when the load is lossy).
inline double through_power_at_depth(const StackSpec& stack, complex surface_admittance,
                                     double frequency, double depth) {
    if (!(depth >= 0.0) || !std::isfinite(depth)) throw invalid_argument("depth must be >= 0");
    const double alpha = -phase_constant(stack.load_medium, frequency).imag();
    return solve_stack(stack, surface_admittance, frequency).through_power * std::exp(-2.0 * alpha * depth);
}

inline double to_db(double power_ratio) {
    if (!(power_ratio > 0.0)) return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(power_ratio);
}

// Floor for CSV emission.
inline constexpr double kDbFloor = -200.0;

inline double clamp_db(double db) { return db < kDbFloor ? kDbFloor : db; }

inline double through_power_db(const StackSpec& stack, complex surface_admittance, double frequency) {
    return to_db(solve_stack(stack, surface_admittance, frequency).through_power);
}

}  // namespace metamatch

#endif  // METAMATCH_CASCADE_HPP
