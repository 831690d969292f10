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

#ifndef METAMATCH_MATCHER_HPP
#define METAMATCH_MATCHER_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "metamatch/cascade.hpp"
#include "metamatch/detail/util.hpp"
#include "metamatch/surface.hpp"

namespace metamatch {

struct SweepAxis {
    std::string name;
    std::vector<double> values;
};

struct SweepGrid {
    SweepAxis axis1;
    SweepAxis axis2;
    double frequency = kDefaultFrequency;
};

inline void validate(const SweepAxis& axis) {
    if (axis.values.empty()) throw invalid_argument("sweep axis '" + axis.name + "' is empty");
    const bool up = axis.values.size() < 2 || axis.values[1] > axis.values[0];
    for (std::size_t i = 1; i < axis.values.size(); ++i)
        if (up ? !(axis.values[i] > axis.values[i - 1]) : !(axis.values[i] < axis.values[i - 1]))
            throw invalid_argument("sweep axis '" + axis.name + "' is not strictly monotone");
}

/// Evenly spaced axis including both ends.
inline SweepAxis linear_axis(std::string name, double first, double last, std::size_t count) {
    if (count < 2) return {std::move(name), {first}};
    SweepAxis axis{std::move(name), {}};
    axis.values.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        axis.values.push_back(first + (last - first) * static_cast<double>(i) /
                                          static_cast<double>(count - 1));
    axis.values.back() = last;
    return axis;
}

/// Stack and surface admittance realised at one (axis1, axis2) grid point.
struct GridPoint {
    StackSpec stack;
    complex admittance;
};

using StackFamily = std::function<GridPoint(double axis1, double axis2)>;

struct SweepResult {
    SweepGrid grid;
    std::vector<double> through_power_db;  // row-major: axis1 rows, axis2 columns
    std::size_t singular_points = 0;

    double at(std::size_t row, std::size_t col) const {
        return through_power_db[row * grid.axis2.values.size() + col];
    }
};

/// Dense through-power map; singular points are recorded at the dB floor.
inline SweepResult sweep_through_power(const StackFamily& family, const SweepGrid& grid,
                                       std::size_t threads = 1) {
    validate(grid.axis1);
    validate(grid.axis2);
    angular_frequency(grid.frequency);
    const std::size_t cols = grid.axis2.values.size();
    const std::size_t n = grid.axis1.values.size() * cols;

    SweepResult out{grid, std::vector<double>(n), 0};
    std::vector<char> singular(n, 0);
    detail::parallel_for(n, threads, [&](std::size_t idx) {
        const auto point = family(grid.axis1.values[idx / cols], grid.axis2.values[idx % cols]);
        try {
            out.through_power_db[idx] =
                clamp_db(through_power_db(point.stack, point.admittance, grid.frequency));
        } catch (const degenerate_stack_error&) {
            out.through_power_db[idx] = kDbFloor;
            singular[idx] = 1;
        }
    });
    for (char s : singular) out.singular_points += static_cast<std::size_t>(s);
    return out;
}

/// Long-format CSV: `axis1,axis2,through_power_db`.
inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
    os << "axis1,axis2,through_power_db\n";
    const auto& a1 = r.grid.axis1.values;
    const auto& a2 = r.grid.axis2.values;
    for (std::size_t i = 0; i < a1.size(); ++i)
        for (std::size_t k = 0; k < a2.size(); ++k)
            os << detail::format_double(a1[i]) << ',' << detail::format_double(a2[k]) << ','
               << detail::format_double(r.at(i, k)) << '\n';
}

struct MatchResult {
    complex best_admittance;
    std::optional<double> best_voltage;
    double through_power_db = 0.0;
    double baseline_db = 0.0;  // Y_s = 0
    double gain_db = 0.0;
    // Every (susceptance or voltage, dB) pair the search evaluated.
    std::vector<std::pair<double, double>> evaluated;
};

namespace detail {

// Golden-section maximisation of a unimodal f on [a, b].
template <class F>
std::pair<double, double> golden_max(F&& f, double a, double b, double tolerance) {
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tolerance) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    return f1 >= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

}  // namespace detail

inline constexpr SusceptanceSpan kDefaultSearchSpan{0.0, 0.12};
inline constexpr std::size_t kDefaultSearchSteps = 61;  // 0.002 S spacing over the default span
inline constexpr double kDefaultSearchTolerance = 1e-4;  // S

/// Best purely imaginary surface admittance: coarse grid, then golden-section refinement around
/// the grid winner. Y_s = 0 is always a candidate, so gain_db >= 0.
inline MatchResult best_admittance(const StackSpec& stack, double frequency,
                                   SusceptanceSpan range = kDefaultSearchSpan,
                                   std::size_t steps = kDefaultSearchSteps,
                                   double tolerance = kDefaultSearchTolerance) {
    if (steps < 2) throw invalid_argument("best_admittance needs at least two grid steps");
    if (!(range.min < range.max)) throw invalid_argument("susceptance range must satisfy min < max");
    validate(stack);

    MatchResult r;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto eval = [&](double b) {
        double db = nan;
        try {
            db = through_power_db(stack, complex(0.0, b), frequency);
        } catch (const degenerate_stack_error&) {
        }
        r.evaluated.emplace_back(b, db);
        return db;
    };

    const double baseline = eval(0.0);
    double best_b = 0.0, best_db = nan;
    std::size_t best_i = steps;  // steps == "the extra Y_s = 0 candidate"
    const auto axis = linear_axis("susceptance", range.min, range.max, steps).values;
    for (std::size_t i = 0; i < steps; ++i) {
        const double db = eval(axis[i]);
        if (!std::isnan(db) && (std::isnan(best_db) || db > best_db)) {
            best_db = db;
            best_b = axis[i];
            best_i = i;
        }
    }
    if (!std::isnan(baseline) && (std::isnan(best_db) || baseline > best_db)) {
        best_db = baseline;
        best_b = 0.0;
        best_i = steps;
    }
    if (std::isnan(best_db)) throw search_error("every candidate admittance is singular");

    if (best_i < steps) {
        const double lo = axis[best_i == 0 ? 0 : best_i - 1];
        const double hi = axis[std::min(best_i + 1, steps - 1)];
        auto objective = [&](double b) {
            const double db = eval(b);
            return std::isnan(db) ? -std::numeric_limits<double>::infinity() : db;
        };
        const auto [b, db] = detail::golden_max(objective, lo, hi, tolerance);
        // Multimodal guard: never return worse than the grid winner.
        if (db > best_db) {
            best_b = b;
            best_db = db;
        }
    }

    if (std::isnan(baseline)) throw search_error("bare stack (Y_s = 0) is singular");
    r.best_admittance = {0.0, best_b};
    r.through_power_db = best_db;
    r.baseline_db = baseline;
    r.gain_db = best_db - baseline;
    return r;
}

/// Best bias voltage from a discrete set; ties go to the higher voltage (lower varactor loss).
inline MatchResult best_voltage(const StackSpec& stack, const ElementCircuit& circuit,
                                double frequency, std::span<const double> voltages) {
    if (voltages.empty()) throw invalid_argument("empty voltage set");
    std::vector<double> order(voltages.begin(), voltages.end());
    std::sort(order.begin(), order.end(), std::greater<>());

    MatchResult r;
    r.baseline_db = through_power_db(stack, 0.0, frequency);
    bool have = false;
    for (double v : order) {
        const auto y = admittance_at_voltage(circuit, v, frequency);
        const double db = through_power_db(stack, y.value, frequency);
        r.evaluated.emplace_back(v, db);
        if (!have || db > r.through_power_db) {
            have = true;
            r.through_power_db = db;
            r.best_voltage = v;
            r.best_admittance = y.value;
        }
    }
    r.gain_db = r.through_power_db - r.baseline_db;
    return r;
}

struct VoltageDrive {
    ElementCircuit circuit;
    double voltage = 0.0;
};

/// Fixed admittance, or a bias voltage whose admittance follows frequency.
using SurfaceDrive = std::variant<complex, VoltageDrive>;

inline complex drive_admittance(const SurfaceDrive& drive, double frequency) {
    if (const auto* y = std::get_if<complex>(&drive)) return *y;
    const auto& v = std::get<VoltageDrive>(drive);
    return admittance_at_voltage(v.circuit, v.voltage, frequency).value;
}

struct SpectrumPoint {
    double frequency = 0.0;
    double reflection_db = 0.0;
    double reduction_db = 0.0;  // bare reflection minus driven reflection
};

inline std::vector<SpectrumPoint> reflection_spectrum(const StackSpec& stack, const SurfaceDrive& drive,
                                                      std::span<const double> frequencies) {
    for (std::size_t i = 1; i < frequencies.size(); ++i)
        if (!(frequencies[i] > frequencies[i - 1]))
            throw invalid_argument("frequency list must be strictly increasing");
    std::vector<SpectrumPoint> out;
    out.reserve(frequencies.size());
    for (double f : frequencies) {
        const double driven = clamp_db(to_db(solve_stack(stack, drive_admittance(drive, f), f).reflected_power));
        const double bare = clamp_db(to_db(solve_stack(stack, 0.0, f).reflected_power));
        out.push_back({f, driven, bare - driven});
    }
    return out;
}

inline void write_spectrum_csv(std::ostream& os, std::span<const SpectrumPoint> points) {
    os << "frequency_hz,reflection_db,reduction_db\n";
    for (const auto& p : points)
        os << detail::format_double(p.frequency) << ',' << detail::format_double(p.reflection_db) << ','
           << detail::format_double(p.reduction_db) << '\n';
}

}  // namespace metamatch

#endif  // METAMATCH_MATCHER_HPP
