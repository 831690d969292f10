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

#include <catch_amalgamated.hpp>

#include <fstream>
#include <set>
#include <sstream>

#include "metamatch/matcher.hpp"

using namespace metamatch;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double f0 = 2.4e9;
const std::vector<double> kControl{30.0, 20.0, 15.0, 10.0, 5.0, 2.5, 0.0};

const ElementCircuit& circuit() {
    static const ElementCircuit c = calibrate_inductances(reference_varactor_table(), f0);
    return c;
}

std::vector<double> susceptance_axis() {
    std::vector<double> v;
    for (int i = 0; i <= 60; ++i) v.push_back(0.002 * i);
    return v;
}

struct GoldenRow {
    double a1, a2, db;
};

std::vector<GoldenRow> read_golden(const std::string& name) {
    std::ifstream in(std::string(METAMATCH_GOLDEN_DIR) + "/" + name);
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);
    REQUIRE(line == "axis1,axis2,through_power_db");
    std::vector<GoldenRow> rows;
    while (std::getline(in, line)) {
        GoldenRow r{};
        char c1, c2;
        std::istringstream ss(line);
        ss >> r.a1 >> c1 >> r.a2 >> c2 >> r.db;
        rows.push_back(r);
    }
    return rows;
}

void check_golden(const std::string& name, const StackFamily& family, std::vector<double> axis1) {
    const SweepGrid grid{{"axis1", std::move(axis1)}, {"susceptance_s", susceptance_axis()}, f0};
    const auto r = sweep_through_power(family, grid, 4);
    const auto golden = read_golden(name);
    REQUIRE(golden.size() == r.through_power_db.size());
    const std::size_t cols = grid.axis2.values.size();
    for (std::size_t i = 0; i < golden.size(); ++i) {
        REQUIRE(golden[i].a1 == grid.axis1.values[i / cols]);
        REQUIRE_THAT(golden[i].a2, WithinAbs(grid.axis2.values[i % cols], 1e-12));
        REQUIRE_THAT(r.through_power_db[i], WithinAbs(golden[i].db, 0.1));
    }
}

}  // namespace

TEST_CASE("best admittance on the default stacks", "[matcher]") {
    const auto w = best_admittance(stacks::air_water(), f0);
    CHECK_THAT(w.best_admittance.imag(), WithinAbs(0.0074698, 1e-4));
    CHECK_THAT(w.through_power_db, WithinAbs(-0.012964, 1e-4));
    CHECK_THAT(w.baseline_db, WithinAbs(-4.436975, 1e-6));
    CHECK_THAT(w.gain_db, WithinAbs(4.0, 1.0));
    CHECK(w.gain_db == w.through_power_db - w.baseline_db);
    for (const auto& [b, db] : w.evaluated) REQUIRE(db <= w.through_power_db);

    const auto t = best_admittance(stacks::air_tissue(), f0);
    CHECK_THAT(t.best_admittance.imag(), WithinAbs(0.0139796, 1e-4));
    CHECK_THAT(t.through_power_db, WithinAbs(-0.043249, 1e-4));
    CHECK_THAT(t.gain_db, WithinAbs(9.0, 2.0));

    const auto m = best_admittance({media::air(), {}, media::air(), 0}, f0);
    CHECK(m.best_admittance == complex(0.0, 0.0));
    CHECK(m.gain_db == 0.0);

    CHECK_THROWS_AS(best_admittance(stacks::air_water(), f0, kDefaultSearchSpan, 1), invalid_argument);
    CHECK_THROWS_AS(best_admittance(stacks::air_water(), f0, {0.1, 0.0}), invalid_argument);
}

TEST_CASE("optimal susceptance falls with the gap", "[matcher][property]") {
    double prev = 1.0;
    for (int gap = 2; gap <= 12; ++gap) {
        const auto r = best_admittance(stacks::air_water(gap * 1e-3), f0);
        REQUIRE(r.best_admittance.imag() <= prev);
        REQUIRE(r.through_power_db <= 1e-12);
        REQUIRE(r.gain_db >= 0.0);
        prev = r.best_admittance.imag();
    }
}

TEST_CASE("best voltage tracks the continuous optimum", "[matcher]") {
    for (int gap = 2; gap <= 12; ++gap) {
        const auto st = stacks::air_water(gap * 1e-3);
        const auto cont = best_admittance(st, f0);
        const auto disc = best_voltage(st, circuit(), f0, kControl);
        REQUIRE(disc.through_power_db >= cont.through_power_db - 1.0);
        REQUIRE(disc.best_voltage.has_value());
    }

    const std::vector<double> single{15.0};
    CHECK(best_voltage(stacks::air_water(), circuit(), f0, single).best_voltage == 15.0);
    CHECK(best_voltage(stacks::air_water(), circuit(), f0, kControl).best_voltage == 10.0);

    std::set<double> chosen;
    for (double fat : {5e-3, 15e-3, 30e-3, 50e-3})
        chosen.insert(*best_voltage(stacks::air_tissue(6e-3, fat), circuit(), f0, kControl).best_voltage);
    CHECK(chosen.size() > 1);

    const auto water2 = best_voltage(stacks::air_water(2e-3), circuit(), f0, kControl);
    const auto tissue2 = best_voltage(stacks::air_tissue(2e-3), circuit(), f0, kControl);
    CHECK(water2.best_voltage != tissue2.best_voltage);

}

TEST_CASE("sweep grid", "[matcher]") {
    const StackFamily family = [](double gap_mm, double b) {
        return GridPoint{stacks::air_water(gap_mm * 1e-3), {0.0, b}};
    };
    const SweepGrid grid{linear_axis("gap_mm", 2.0, 12.0, 11), {"susceptance_s", susceptance_axis()}, f0};
    const auto r = sweep_through_power(family, grid, 3);
    REQUIRE(r.through_power_db.size() == 11 * 61);
    for (std::size_t i = 0; i < 11; ++i) {
        REQUIRE(r.at(i, 0) == through_power_db(stacks::air_water(grid.axis1.values[i] * 1e-3), 0.0, f0));
        double best = -1e9;
        for (std::size_t k = 0; k < 61; ++k) best = std::max(best, r.at(i, k));
        REQUIRE(best <= 0.0);
    }
    const auto serial = sweep_through_power(family, grid, 1);
    CHECK(serial.through_power_db == r.through_power_db);

    SweepGrid empty = grid;
    empty.axis1.values.clear();
    CHECK_THROWS_AS(sweep_through_power(family, empty), invalid_argument);
    SweepGrid bumpy = grid;
    bumpy.axis2.values = {0.0, 0.01, 0.005};
    CHECK_THROWS_AS(sweep_through_power(family, bumpy), invalid_argument);

    std::ostringstream os;
    write_sweep_csv(os, r);
    CHECK(os.str().rfind("axis1,axis2,through_power_db\n2,0,", 0) == 0);
}

TEST_CASE("heatmaps match the committed golden files", "[matcher][golden]") {
    std::vector<double> gaps, fats;
    for (int g = 2; g <= 12; ++g) gaps.push_back(g);
    for (int f = 5; f <= 50; f += 5) fats.push_back(f);

    check_golden("water_gap_susceptance.csv",
                 [](double g, double b) { return GridPoint{stacks::air_water(g * 1e-3), {0.0, b}}; }, gaps);
    check_golden("tissue_gap_susceptance.csv",
                 [](double g, double b) { return GridPoint{stacks::air_tissue(g * 1e-3), {0.0, b}}; }, gaps);
    check_golden("tissue_fat_susceptance.csv",
                 [](double f, double b) { return GridPoint{stacks::air_tissue(6e-3, f * 1e-3), {0.0, b}}; },
                 fats);
}

TEST_CASE("reflection spectra", "[matcher]") {
    std::vector<double> freqs;
    for (int i = 0; i <= 120; ++i) freqs.push_back(1.8e9 + 10e6 * i);
    const auto at = [&](const std::vector<SpectrumPoint>& s, double f) {
        for (const auto& p : s)
            if (std::abs(p.frequency - f) < 1.0) return p;
        FAIL("frequency not in spectrum");
        return SpectrumPoint{};
    };

    for (const auto& st : {stacks::air_water(), stacks::air_tissue()}) {
        const auto m = best_admittance(st, f0);
        const auto s = reflection_spectrum(st, m.best_admittance, freqs);
        const auto c = at(s, f0);
        CHECK(c.reduction_db >= 10.0);
        CHECK(c.reduction_db >= at(s, f0 - 300e6).reduction_db);
        CHECK(c.reduction_db >= at(s, f0 + 300e6).reduction_db);
    }

    // A voltage-driven surface: the trough moves when capacitance drops.
    const auto trough = [&](double v) {
        const auto s = reflection_spectrum(stacks::air_water(), VoltageDrive{circuit(), v}, freqs);
        return std::min_element(s.begin(), s.end(), [](auto& a, auto& b) {
                   return a.reflection_db < b.reflection_db;
               })->frequency;
    };
    CHECK(trough(10.0) != trough(15.0));

    const std::vector<double> backwards{2.5e9, 2.4e9};
    CHECK_THROWS_AS(reflection_spectrum(stacks::air_water(), complex{}, backwards), invalid_argument);

    std::ostringstream os;
    write_spectrum_csv(os, reflection_spectrum(stacks::air_water(), complex{}, std::vector<double>{f0}));
    CHECK(os.str() == "frequency_hz,reflection_db,reduction_db\n2.4e+09,-1.9382002601611288,0\n");
}
