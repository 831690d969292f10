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

#ifndef METAMATCH_SURFACE_HPP
#define METAMATCH_SURFACE_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "metamatch/media.hpp"

namespace metamatch {

struct VaractorRow {
    double voltage = 0.0;      // V, reverse bias
    double capacitance = 0.0;  // F
    double resistance = 0.0;   // ohm
};

/// Bias-voltage lookup table, kept sorted by ascending voltage.
class VaractorTable {
public:
    VaractorTable() = default;

    explicit VaractorTable(std::vector<VaractorRow> rows) : rows_(std::move(rows)) {
        std::sort(rows_.begin(), rows_.end(),
                  [](const auto& a, const auto& b) { return a.voltage < b.voltage; });
        if (rows_.size() < 2) throw invalid_argument("varactor table needs at least two rows");
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            const auto& r = rows_[i];
            if (!(r.capacitance > 0.0) || !(r.resistance > 0.0) || !std::isfinite(r.voltage))
                throw invalid_argument("varactor rows need finite voltage and positive C, R");
            if (i == 0) continue;
            const auto& p = rows_[i - 1];
            if (!(r.voltage > p.voltage))
                throw invalid_argument("duplicate voltage in varactor table");
            if (!(r.capacitance < p.capacitance) || !(r.resistance < p.resistance))
                throw invalid_argument(
                    "varactor capacitance and resistance must strictly decrease with voltage");
        }
    }

    const std::vector<VaractorRow>& rows() const { return rows_; }
    double min_voltage() const { return rows_.front().voltage; }
    double max_voltage() const { return rows_.back().voltage; }
    double max_capacitance() const { return rows_.front().capacitance; }

private:
    std::vector<VaractorRow> rows_;
};

// SMV1405 reverse-bias characteristics.
inline VaractorTable reference_varactor_table() {
    return VaractorTable({{30.0, 0.71e-12, 0.26},
                          {20.0, 0.81e-12, 0.30},
                          {15.0, 0.90e-12, 0.36},
                          {10.0, 1.00e-12, 0.38},
                          {5.0, 1.32e-12, 0.45},
                          {0.0, 3.72e-12, 0.63}});
}

struct VaractorState {
    double capacitance = 0.0;
    double resistance = 0.0;
};

/// Piecewise-linear between knots, exact at knots, no extrapolation.
inline VaractorState varactor_at(const VaractorTable& table, double voltage) {
    const auto& rows = table.rows();
    if (!(voltage >= table.min_voltage() && voltage <= table.max_voltage()))
        throw range_error("bias voltage " + std::to_string(voltage) + " V outside the varactor table");
    auto hi = std::lower_bound(rows.begin(), rows.end(), voltage,
                               [](const VaractorRow& r, double v) { return r.voltage < v; });
    if (hi->voltage == voltage) return {hi->capacitance, hi->resistance};
    auto lo = hi - 1;
    const double u = (voltage - lo->voltage) / (hi->voltage - lo->voltage);
    return {lo->capacitance + u * (hi->capacitance - lo->capacitance),
            lo->resistance + u * (hi->resistance - lo->resistance)};
}

/// Inverse lookup: the table state whose capacitance is `capacitance`, resistance interpolated
/// piecewise-linearly in capacitance.
inline VaractorState varactor_for_capacitance(const VaractorTable& table, double capacitance) {
    const auto& rows = table.rows();  // capacitance decreases along rows
    // Unit conversions (pF to F) can land one ulp outside the end knots.
    constexpr double slack = 1e-12;
    const double c_max = rows.front().capacitance, c_min = rows.back().capacitance;
    if (!(capacitance <= c_max * (1.0 + slack) && capacitance >= c_min * (1.0 - slack)))
        throw range_error("capacitance outside the varactor table");
    capacitance = std::clamp(capacitance, c_min, c_max);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& a = rows[i - 1];
        const auto& b = rows[i];
        if (capacitance >= b.capacitance) {
            const double u = (capacitance - a.capacitance) / (b.capacitance - a.capacitance);
            return {capacitance, a.resistance + u * (b.resistance - a.resistance)};
        }
    }
    return {capacitance, rows.back().resistance};
}

/// Patch inductance L1 in series with the varactor, bias-wire inductance L2 in parallel.
struct ElementCircuit {
    double patch_inductance = 0.0;      // L1, H
    double bias_wire_inductance = 0.0;  // L2, H
    VaractorTable varactors = reference_varactor_table();
    double design_frequency = kDefaultFrequency;
    // Additive shift modelling media coupling; Re >= 0 keeps the surface passive.
    complex coupling_offset{0.0, 0.0};
};

inline double resonance_factor(double capacitance, double patch_inductance, double frequency) {
    const double w = angular_frequency(frequency);
    return 1.0 - w * w * capacitance * patch_inductance;
}

inline void validate(const ElementCircuit& c) {
    if (!(c.patch_inductance > 0.0) || !(c.bias_wire_inductance > 0.0))
        throw invalid_argument("element inductances must be positive");
    if (!(c.coupling_offset.real() >= 0.0))
        throw invalid_argument("coupling offset must not add negative conductance");
    for (const auto& r : c.varactors.rows())
        if (!(resonance_factor(r.capacitance, c.patch_inductance, c.design_frequency) > 0.0))
            throw resonance_error("patch resonance inside the varactor range at the design frequency");
}

struct SurfaceAdmittance {
    complex value;

    double conductance() const { return value.real(); }
    double susceptance() const { return value.imag(); }
};

namespace detail {

inline void check_element_inputs(const ElementCircuit& circuit, double capacitance, double resistance,
                                 double frequency) {
    if (!(capacitance > 0.0) || !(resistance >= 0.0))
        throw invalid_argument("capacitance must be > 0 and resistance >= 0");
    if (!(circuit.patch_inductance > 0.0) || !(circuit.bias_wire_inductance > 0.0))
        throw invalid_argument("element inductances must be positive");
    if (!(resonance_factor(capacitance, circuit.patch_inductance, frequency) > 0.0))
        throw resonance_error("1 - w^2 C L1 <= 0");
}

}  // namespace detail

inline SurfaceAdmittance admittance_exact(const ElementCircuit& circuit, double capacitance,
                                          double resistance, double frequency) {
    detail::check_element_inputs(circuit, capacitance, resistance, frequency);
    const double w = angular_frequency(frequency);
    const complex series = 1.0 / (j * w * capacitance) + resistance + j * w * circuit.patch_inductance;
    return {1.0 / series + 1.0 / (j * w * circuit.bias_wire_inductance)};
}

// Valid while (w C R)^2 << 1 - w^2 C L1.
inline SurfaceAdmittance admittance_approx(const ElementCircuit& circuit, double capacitance,
                                           double resistance, double frequency) {
    detail::check_element_inputs(circuit, capacitance, resistance, frequency);
    const double w = angular_frequency(frequency);
    const double x = resonance_factor(capacitance, circuit.patch_inductance, frequency);
    const double g = w * w * capacitance * capacitance * resistance / (x * x);
    const double b = w * capacitance / x - 1.0 / (w * circuit.bias_wire_inductance);
    return {{g, b}};
}

/// Exact admittance at a bias voltage, with the circuit's coupling offset applied.
inline SurfaceAdmittance admittance_at_voltage(const ElementCircuit& circuit, double voltage,
                                               double frequency) {
    const auto state = varactor_at(circuit.varactors, voltage);
    auto y = admittance_exact(circuit, state.capacitance, state.resistance, frequency);
    y.value += circuit.coupling_offset;
    return y;
}

struct SusceptanceSpan {
    double min = 0.0;  // S
    double max = 0.1;  // S
};

// Conductance must stay an order of magnitude below susceptance.
inline constexpr double kMaxLossRatio = 0.1;
// Smallest 1 - w^2 C L1 tolerated anywhere in the table.
inline constexpr double kResonanceMargin = 0.05;

namespace detail {

inline double bisect(double lo, double hi, int iterations, auto&& lo_side) {
    for (int i = 0; i < iterations; ++i) {
        const double mid = 0.5 * (lo + hi);
        (lo_side(mid) ? lo : hi) = mid;
    }
    return hi;
}

struct CalibrationProbe {
    double bias_wire_inductance = 0.0;
    double span_min = 0.0;
    double span_max = 0.0;
    bool floor_reachable = false;
};

// For a fixed L1, bisect L2 so that the highest-voltage row sits at
// max(target_min, G / kMaxLossRatio), then report the susceptance span.
inline CalibrationProbe probe_patch_inductance(const VaractorTable& table, double frequency,
                                               double target_min, double l1) {
    const double w = angular_frequency(frequency);
    const auto& top = table.rows().back();
    const complex series = 1.0 / (j * w * top.capacitance) + top.resistance + j * w * l1;
    const complex branch = 1.0 / series;
    const double floor = std::max(target_min, branch.real() / kMaxLossRatio);

    CalibrationProbe p;
    if (!(branch.imag() > floor)) return p;
    p.floor_reachable = true;

    auto susceptance_top = [&](double l2) { return branch.imag() - 1.0 / (w * l2); };
    // Susceptance grows with L2; keep the end of the bracket that stays >= floor.
    double lo = 1e-12, hi = 1e-5;
    while (susceptance_top(hi) < floor) hi *= 10.0;
    p.bias_wire_inductance =
        bisect(lo, hi, 200, [&](double l2) { return susceptance_top(l2) < floor; });

    ElementCircuit c{l1, p.bias_wire_inductance, table, frequency, {}};
    p.span_min = susceptance_top(p.bias_wire_inductance);
    p.span_max = p.span_min;
    for (const auto& r : table.rows())
        p.span_max = std::max(p.span_max,
                              admittance_exact(c, r.capacitance, r.resistance, frequency).susceptance());
    return p;
}

}  // namespace detail

/// Picks (L1, L2) so the highest-bias row sits at the bottom of `target` and some row reaches
/// its top, with the smallest patch inductance that does so.
inline ElementCircuit calibrate_inductances(const VaractorTable& table, double frequency,
                                            SusceptanceSpan target = {}) {
    if (!(target.min < target.max) || !std::isfinite(target.max))
        throw invalid_argument("calibration target must satisfy min < max");
    const double w = angular_frequency(frequency);
    const double l1_cap = (1.0 - kResonanceMargin) / (w * w * table.max_capacitance());

    const auto at_cap = detail::probe_patch_inductance(table, frequency, target.min, l1_cap);
    if (!at_cap.floor_reachable || at_cap.span_max < target.max)
        throw calibration_error("target susceptance span [" + std::to_string(target.min) + ", " +
                                    std::to_string(target.max) + "] S is infeasible; best span [" +
                                    std::to_string(at_cap.span_min) + ", " +
                                    std::to_string(at_cap.span_max) + "] S",
                                at_cap.span_min, at_cap.span_max);

    auto short_of_target = [&](double l1) {
        const auto p = detail::probe_patch_inductance(table, frequency, target.min, l1);
        return !p.floor_reachable || p.span_max < target.max;
    };
    const double l1 = detail::bisect(l1_cap * 1e-3, l1_cap, 200, short_of_target);
    const auto p = detail::probe_patch_inductance(table, frequency, target.min, l1);
    ElementCircuit c{l1, p.bias_wire_inductance, table, frequency, {}};
    validate(c);
    return c;
}

}  // namespace metamatch

#endif  // METAMATCH_SURFACE_HPP
