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

#ifndef METAMATCH_CONTROLLER_HPP
#define METAMATCH_CONTROLLER_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "metamatch/channel.hpp"
#include "metamatch/detail/util.hpp"
#include "metamatch/surface.hpp"

namespace metamatch {

/// Black-box feedback: configuration in, measured RSS (dB) out. Probes are issued in order.
using Oracle = std::function<double(const SurfaceConfig&)>;

/// Control alphabet, strictly decreasing voltages.
class VoltageSet {
public:
    VoltageSet() : VoltageSet(std::vector<double>{30.0, 20.0, 15.0, 10.0, 5.0, 2.5, 0.0}) {}

    explicit VoltageSet(std::vector<double> volts) : v_(std::move(volts)) {
        if (v_.empty()) throw invalid_argument("voltage set is empty");
        for (std::size_t i = 1; i < v_.size(); ++i)
            if (!(v_[i] < v_[i - 1])) throw invalid_argument("voltage set must be strictly decreasing");
    }

    void check_within(const VaractorTable& t) const {
        for (double v : v_)
            if (v < t.min_voltage() || v > t.max_voltage())
                throw invalid_argument("control voltage " + std::to_string(v) +
                                       " V outside the varactor table");
    }

    std::size_t size() const { return v_.size(); }
    double operator[](std::size_t i) const { return v_[i]; }
    const std::vector<double>& values() const { return v_; }

    std::size_t index_of(double v) const {
        for (std::size_t i = 0; i < v_.size(); ++i)
            if (v_[i] == v) return i;
        throw invalid_argument("voltage " + std::to_string(v) + " V not in the control set");
    }

private:
    std::vector<double> v_;
};

/// Elements switched together. Element-wise control is one group per element.
struct ElementGroups {
    std::vector<std::size_t> group_of;
    std::size_t count = 0;

    static ElementGroups element_wise(std::size_t n) {
        ElementGroups g{std::vector<std::size_t>(n), n};
        for (std::size_t i = 0; i < n; ++i) g.group_of[i] = i;
        return g;
    }

    // Row-major geometry; one group per column.
    static ElementGroups columns(const ArrayGeometry& geo) {
        ElementGroups g{std::vector<std::size_t>(geo.elements()), geo.cols};
        for (std::size_t i = 0; i < geo.elements(); ++i) g.group_of[i] = i % geo.cols;
        return g;
    }

    std::size_t elements() const { return group_of.size(); }

    /// Expand a per-group on/off pattern into element voltages.
    SurfaceConfig expand(const std::vector<bool>& group_on, double v_on, double v_off) const {
        SurfaceConfig c{std::vector<double>(elements())};
        for (std::size_t i = 0; i < elements(); ++i) c.voltages[i] = group_on[group_of[i]] ? v_on : v_off;
        return c;
    }
};

enum class Stage : int { uniform = 1, voting = 2, fine_tune = 3, enumeration = 4 };

struct ProbeRecord {
    Stage stage;
    std::size_t index;  // global probe order within the run
    SurfaceConfig config;
    double rss_db;
};

struct oracle_error : std::runtime_error {
    oracle_error(const std::string& what, std::vector<ProbeRecord> partial)
        : std::runtime_error(what), partial_trace(std::move(partial)) {}
    std::vector<ProbeRecord> partial_trace;
};

/// Every probe in issue order.
class ControlTrace {
public:
    double probe(Stage stage, const Oracle& oracle, SurfaceConfig config) {
        double rss;
        try {
            rss = oracle(config);
        } catch (const std::exception& e) {
            throw oracle_error(std::string("oracle failed: ") + e.what(), records_);
        }
        records_.push_back({stage, records_.size(), std::move(config), rss});
        return rss;
    }

    const std::vector<ProbeRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }

    std::size_t count(Stage s) const {
        return static_cast<std::size_t>(
            std::count_if(records_.begin(), records_.end(), [s](const auto& r) { return r.stage == s; }));
    }

    /// Highest RSS so far; the earliest probe wins ties.
    const ProbeRecord& best() const {
        if (records_.empty()) throw invalid_argument("empty trace");
        const ProbeRecord* b = &records_.front();
        for (const auto& r : records_)
            if (r.rss_db > b->rss_db) b = &r;
        return *b;
    }

    /// Best-seen RSS after each probe; non-decreasing.
    std::vector<double> best_seen() const {
        std::vector<double> out;
        double b = -std::numeric_limits<double>::infinity();
        for (const auto& r : records_) out.push_back(b = std::max(b, r.rss_db));
        return out;
    }

    /// `stage,probe_index,config_hash,rss_db` per probe.
    void write_csv(std::ostream& os) const {
        os << "stage,probe_index,config_hash,rss_db\n";
        for (const auto& r : records_)
            os << static_cast<int>(r.stage) << ',' << r.index << ',' << config_hash(r.config) << ','
               << detail::format_double(r.rss_db) << '\n';
    }

private:
    std::vector<ProbeRecord> records_;
};

struct Stage1Result {
    double v1 = 0.0;  // maximises feedback
    double v0 = 0.0;  // minimises feedback among the others
    bool low_contrast = false;
};

/// Applies each control voltage to every element. Ties resolve toward the higher voltage.
inline Stage1Result stage1_uniform_probe(const Oracle& oracle, const VoltageSet& voltages,
                                         std::size_t elements, ControlTrace& trace,
                                         double low_contrast_db = 0.1) {
    if (voltages.size() < 2) throw invalid_argument("stage 1 needs at least two control voltages");
    std::vector<double> rss;
    for (double v : voltages.values())
        rss.push_back(trace.probe(Stage::uniform, oracle, SurfaceConfig::uniform(elements, v)));

    std::size_t hi = 0;
    for (std::size_t i = 1; i < rss.size(); ++i)
        if (rss[i] > rss[hi]) hi = i;
    std::optional<std::size_t> lo;
    for (std::size_t i = 0; i < rss.size(); ++i)
        if (i != hi && (!lo || rss[i] < rss[*lo])) lo = i;

    const auto [mn, mx] = std::minmax_element(rss.begin(), rss.end());
    return {voltages[hi], voltages[*lo], *mx - *mn <= low_contrast_db};
}

struct Stage2Result {
    std::vector<bool> group_on;
    SurfaceConfig config;
    std::vector<std::size_t> votes;
    std::size_t voting_configs = 0;
    double median_rss_db = 0.0;
};

/// Randomized majority voting over on/off patterns. Configs strictly above the median vote for
/// each group they turn on; a group ends on when it holds votes from more than half of the
/// voting configs.
inline Stage2Result stage2_majority_voting(const Oracle& oracle, double v1, double v0,
                                           const ElementGroups& groups, std::size_t n_configs,
                                           std::uint64_t rng_seed, ControlTrace& trace) {
    if (v1 == v0) throw invalid_argument("stage 2 needs distinct on and off voltages");
    if (n_configs == 0) throw invalid_argument("stage 2 needs at least one random config");
    detail::Rng rng(rng_seed);

    std::vector<std::vector<bool>> patterns(n_configs, std::vector<bool>(groups.count));
    std::vector<double> rss(n_configs);
    for (std::size_t k = 0; k < n_configs; ++k) {
        for (std::size_t g = 0; g < groups.count; ++g) patterns[k][g] = rng.coin();
        rss[k] = trace.probe(Stage::voting, oracle, groups.expand(patterns[k], v1, v0));
    }

    Stage2Result r;
    r.median_rss_db = detail::median(rss);
    r.votes.assign(groups.count, 0);
    for (std::size_t k = 0; k < n_configs; ++k) {
        if (!(rss[k] > r.median_rss_db)) continue;
        ++r.voting_configs;
        for (std::size_t g = 0; g < groups.count; ++g) r.votes[g] += patterns[k][g] ? 1 : 0;
    }
    r.group_on.resize(groups.count);
    for (std::size_t g = 0; g < groups.count; ++g) r.group_on[g] = 2 * r.votes[g] > r.voting_configs;
    r.config = groups.expand(r.group_on, v1, v0);
    return r;
}

struct ControlState {
    double v1 = 0.0;
    double v0 = 0.0;
    std::vector<std::size_t> on_set;   // S_1, element indices
    std::vector<std::size_t> off_set;  // S_0
    std::vector<bool> group_on;
    std::size_t budget_used = 0;
    SurfaceConfig best_config;
    double best_rss_db = -std::numeric_limits<double>::infinity();
};

struct Stage3Result {
    double v1 = 0.0;
    double v0 = 0.0;
    SurfaceConfig config;  // best among the stage-3 probes
    double rss_db = 0.0;
    std::size_t probes = 0;
};

/// Moves V1 and V0 to their neighbours in the control set (3 x 3 grid, centre included) while
/// keeping the on/off pattern. Pairs with V1 == V0 are uniform configs already measured in stage 1
/// and are skipped.
inline Stage3Result stage3_fine_tune(const Oracle& oracle, const ControlState& state,
                                     const VoltageSet& voltages, const ElementGroups& groups,
                                     ControlTrace& trace) {
    const std::size_t i1 = voltages.index_of(state.v1);
    const std::size_t i0 = voltages.index_of(state.v0);
    auto neighbours = [&](std::size_t i) {
        std::vector<std::size_t> n{i};
        if (i > 0) n.push_back(i - 1);
        if (i + 1 < voltages.size()) n.push_back(i + 1);
        return n;
    };

    Stage3Result r;
    bool have = false;
    for (std::size_t a : neighbours(i1)) {
        for (std::size_t b : neighbours(i0)) {
            if (a == b) continue;
            auto cfg = groups.expand(state.group_on, voltages[a], voltages[b]);
            const double rss = trace.probe(Stage::fine_tune, oracle, cfg);
            ++r.probes;
            if (!have || rss > r.rss_db) {
                have = true;
                r = {voltages[a], voltages[b], std::move(cfg), rss, r.probes};
            }
        }
    }
    return r;
}

struct ControllerParams {
    VoltageSet voltages;
    ElementGroups groups = ElementGroups::element_wise(64);
    std::size_t n_configs = 0;  // 0 = twice the group count
    std::uint64_t rng_seed = 1;
    std::size_t budget_cap = 0;  // 0 = |voltages| + n_configs + 9
    double low_contrast_db = 0.1;

    std::size_t configs() const { return n_configs ? n_configs : 2 * groups.count; }
    std::size_t cap() const { return budget_cap ? budget_cap : voltages.size() + configs() + 9; }
};

struct ControlOutcome {
    SurfaceConfig config;  // argmax over every probe of the run
    double rss_db = 0.0;
    ControlState state;
    Stage1Result stage1;
    ControlTrace trace;
};

/// Three-stage search: uniform probe, randomized majority voting, neighbour fine tuning.
inline ControlOutcome run_controller(const Oracle& oracle, const ControllerParams& params) {
    ControlOutcome out;
    const std::size_t n = params.groups.elements();
    if (n == 0) throw invalid_argument("controller needs at least one element");

    out.stage1 = stage1_uniform_probe(oracle, params.voltages, n, out.trace, params.low_contrast_db);
    auto s2 = stage2_majority_voting(oracle, out.stage1.v1, out.stage1.v0, params.groups,
                                     params.configs(), params.rng_seed, out.trace);

    auto& st = out.state;
    st.v1 = out.stage1.v1;
    st.v0 = out.stage1.v0;
    st.group_on = s2.group_on;
    for (std::size_t i = 0; i < n; ++i)
        (s2.group_on[params.groups.group_of[i]] ? st.on_set : st.off_set).push_back(i);

    const auto s3 = stage3_fine_tune(oracle, st, params.voltages, params.groups, out.trace);
    st.v1 = s3.v1;
    st.v0 = s3.v0;

    const auto& best = out.trace.best();
    st.best_config = best.config;
    st.best_rss_db = best.rss_db;
    st.budget_used = out.trace.size();
    if (st.budget_used > params.cap())
        throw budget_error("controller used " + std::to_string(st.budget_used) + " probes, cap " +
                           std::to_string(params.cap()));
    out.config = best.config;
    out.rss_db = best.rss_db;
    return out;
}

struct EnumerationResult {
    SurfaceConfig config;
    double rss_db = -std::numeric_limits<double>::infinity();
    std::size_t probes = 0;
};

inline constexpr std::size_t kDefaultEnumerationCap = 65536;

/// Exhaustive on/off search over element groups with states {v1, v0}.
inline EnumerationResult brute_force_baseline(const Oracle& oracle, const ElementGroups& groups,
                                              double v1, double v0,
                                              std::size_t cap = kDefaultEnumerationCap,
                                              ControlTrace* trace = nullptr) {
    if (groups.count >= 63 || (std::size_t{1} << groups.count) > cap)
        throw budget_error("enumerating 2^" + std::to_string(groups.count) +
                           " configurations exceeds the cap of " + std::to_string(cap));
    ControlTrace local;
    ControlTrace& t = trace ? *trace : local;
    EnumerationResult r;
    const std::size_t total = std::size_t{1} << groups.count;
    std::vector<bool> on(groups.count);
    for (std::size_t mask = 0; mask < total; ++mask) {
        for (std::size_t g = 0; g < groups.count; ++g) on[g] = (mask >> g) & 1U;
        auto cfg = groups.expand(on, v1, v0);
        const double rss = t.probe(Stage::enumeration, oracle, cfg);
        ++r.probes;
        if (rss > r.rss_db) {
            r.rss_db = rss;
            r.config = std::move(cfg);
        }
    }
    return r;
}

}  // namespace metamatch

#endif  // METAMATCH_CONTROLLER_HPP
