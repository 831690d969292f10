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

#include <sstream>

#include "metamatch/controller.hpp"

using namespace metamatch;
using Catch::Matchers::WithinAbs;

namespace {

// Noiseless |h_env + sum s(V_i) h_i| in dB over a fixed response alphabet.
struct ToyOracle {
    complex h_env;
    std::vector<complex> h;
    std::function<complex(double)> s;
    std::size_t* calls = nullptr;

    double operator()(const SurfaceConfig& c) const {
        if (calls) ++*calls;
        complex sum = h_env;
        for (std::size_t i = 0; i < h.size(); ++i) sum += s(c.voltages[i]) * h[i];
        return amplitude_db(sum);
    }
};

// s(V) magnitude rises as V falls.
complex rising(double v) { return {1.0 - v / 31.0, 0.0}; }

complex on_off(double v) { return v == 1.0 ? complex(1.0, 0.0) : complex(0.0, 0.0); }

}  // namespace

TEST_CASE("voltage set and groups", "[controller]") {
    const VoltageSet v;
    CHECK(v.size() == 7);
    CHECK(v.index_of(2.5) == 5);
    CHECK_THROWS_AS(v.index_of(7.0), invalid_argument);
    CHECK_THROWS_AS(VoltageSet({10.0, 20.0}), invalid_argument);
    CHECK_THROWS_AS(VoltageSet(std::vector<double>{}), invalid_argument);
    CHECK_NOTHROW(v.check_within(reference_varactor_table()));
    CHECK_THROWS_AS(VoltageSet({40.0, 0.0}).check_within(reference_varactor_table()), invalid_argument);

    const auto cols = ElementGroups::columns({8, 8});
    CHECK(cols.count == 8);
    CHECK(cols.group_of[9] == 1);
    std::vector<bool> on(8, false);
    on[1] = true;
    const auto cfg = cols.expand(on, 0.0, 30.0);
    CHECK(cfg.voltages[1] == 0.0);
    CHECK(cfg.voltages[57] == 0.0);
    CHECK(cfg.voltages[2] == 30.0);
}

TEST_CASE("stage 1 uniform probe", "[controller]") {
    const VoltageSet v;
    ToyOracle toy{0.0, std::vector<complex>(4, 1.0), rising};
    ControlTrace trace;
    const auto r = stage1_uniform_probe(toy, v, 4, trace);
    CHECK(r.v1 == 0.0);
    CHECK(r.v0 == 30.0);
    CHECK_FALSE(r.low_contrast);
    CHECK(trace.size() == v.size());
    CHECK(trace.count(Stage::uniform) == v.size());

    ControlTrace flat_trace;
    const auto flat = stage1_uniform_probe([](const SurfaceConfig&) { return -3.0; }, v, 4, flat_trace);
    CHECK(flat.low_contrast);
    CHECK(flat.v1 == 30.0);
    CHECK(flat.v0 == 20.0);

    ControlTrace failing;
    int n = 0;
    const Oracle broken = [&](const SurfaceConfig&) {
        if (++n == 3) throw std::runtime_error("link lost");
        return 0.0;
    };
    try {
        stage1_uniform_probe(broken, v, 4, failing);
        FAIL("expected oracle_error");
    } catch (const oracle_error& e) {
        CHECK(e.partial_trace.size() == 2);
    }
}

TEST_CASE("stage 2 on two opposed paths", "[controller]") {
    ToyOracle toy{0.0, {1.0, -1.0}, on_off};
    const auto groups = ElementGroups::element_wise(2);
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        ControlTrace trace;
        const auto r = stage2_majority_voting(toy, 1.0, 0.0, groups, 16, seed, trace);
        REQUIRE(trace.count(Stage::voting) == 16);
        REQUIRE_FALSE((r.group_on[0] && r.group_on[1]));
        if (r.group_on[0] != r.group_on[1]) REQUIRE_THAT(toy(r.config), WithinAbs(0.0, 1e-12));
    }
    ControlTrace t;
    CHECK_THROWS_AS(stage2_majority_voting(toy, 1.0, 1.0, groups, 4, 1, t), invalid_argument);
}

TEST_CASE("aligned paths turn on", "[controller]") {
    const std::size_t n = 32;
    ToyOracle toy{0.0, std::vector<complex>(n, 1.0), on_off};
    const auto groups = ElementGroups::element_wise(n);
    std::size_t on = 0, full_all_on = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        ControlTrace trace;
        const auto r = stage2_majority_voting(toy, 1.0, 0.0, groups, 2 * n, seed, trace);
        on += static_cast<std::size_t>(std::count(r.group_on.begin(), r.group_on.end(), true));

        ControllerParams p{VoltageSet({1.0, 0.0}), groups, 0, seed};
        const auto out = run_controller(toy, p);
        full_all_on += out.config == SurfaceConfig::uniform(n, 1.0) ? 1 : 0;
    }
    CHECK(static_cast<double>(on) / (100.0 * n) >= 0.6);
    CHECK(full_all_on >= 95);
}

TEST_CASE("stage 3 fine tuning", "[controller]") {
    const VoltageSet v;
    const auto groups = ElementGroups::element_wise(3);
    ToyOracle toy{0.0, {1.0, 1.0, 1.0}, rising};
    ControlState st;
    st.v1 = 5.0;
    st.v0 = 20.0;
    st.group_on = {true, true, false};
    ControlTrace trace;
    const auto r = stage3_fine_tune(toy, st, v, groups, trace);
    CHECK(r.probes == 9);
    CHECK(r.v1 == 2.5);
    CHECK(r.v0 == 15.0);

    // Corners have fewer neighbours; equal pairs are skipped.
    st.v1 = 0.0;
    st.v0 = 2.5;
    ControlTrace corner;
    CHECK(stage3_fine_tune(toy, st, v, groups, corner).probes == 4);
}

TEST_CASE("full controller budget and replay", "[controller]") {
    const std::size_t n = 64;
    detail::Rng rng(5);
    std::vector<complex> h(n);
    for (auto& x : h) x = {rng.normal() / 8.0, rng.normal() / 8.0};
    ToyOracle toy{complex(0.1, -0.2), h, rising};

    ControllerParams p;
    p.rng_seed = 77;
    const auto a = run_controller(toy, p);
    CHECK(a.trace.count(Stage::uniform) == 7);
    CHECK(a.trace.count(Stage::voting) == 128);
    CHECK(a.trace.count(Stage::fine_tune) <= 9);
    CHECK(a.trace.size() <= 145);
    CHECK(a.state.budget_used == a.trace.size());
    CHECK(a.state.on_set.size() + a.state.off_set.size() == n);

    double stage1_best = -1e9;
    for (const auto& r : a.trace.records())
        if (r.stage == Stage::uniform) stage1_best = std::max(stage1_best, r.rss_db);
    CHECK(a.rss_db >= stage1_best);
    for (const auto& r : a.trace.records()) REQUIRE(a.rss_db >= r.rss_db);
    const auto seen = a.trace.best_seen();
    CHECK(std::is_sorted(seen.begin(), seen.end()));

    const auto b = run_controller(toy, p);
    std::ostringstream sa, sb;
    a.trace.write_csv(sa);
    b.trace.write_csv(sb);
    CHECK(sa.str() == sb.str());
    CHECK(sa.str().rfind("stage,probe_index,config_hash,rss_db\n1,0,", 0) == 0);

    p.budget_cap = 100;
    CHECK_THROWS_AS(run_controller(toy, p), budget_error);
}

TEST_CASE("brute-force enumeration", "[controller]") {
    std::size_t calls = 0;
    ToyOracle toy{0.0, std::vector<complex>(64, 1.0), rising, &calls};
    const auto cols = ElementGroups::columns({8, 8});
    const auto r = brute_force_baseline(toy, cols, 0.0, 30.0);
    CHECK(r.probes == 256);
    CHECK(calls == 256);
    CHECK(r.config == SurfaceConfig::uniform(64, 0.0));

    CHECK(brute_force_baseline(toy, ElementGroups{std::vector<std::size_t>(64, 0), 1}, 0.0, 30.0).probes == 2);
    CHECK_THROWS_AS(brute_force_baseline(toy, ElementGroups::element_wise(64), 0.0, 30.0), budget_error);
    CHECK_THROWS_AS(brute_force_baseline(toy, cols, 0.0, 30.0, 100), budget_error);
}
