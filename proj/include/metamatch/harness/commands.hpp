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

#ifndef METAMATCH_HARNESS_COMMANDS_HPP
#define METAMATCH_HARNESS_COMMANDS_HPP

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "metamatch/harness/scenario.hpp"

namespace metamatch::harness {

namespace fs = std::filesystem;

struct RunOptions {
    fs::path out_dir = "out";
    std::size_t parallel = 1;
    std::optional<std::uint64_t> seed;          // overrides the scenario's channel seed
    std::optional<std::size_t> links;           // overrides the scenario's link/trial count
};

/// Summary table plus the CSV files a command produced.
struct RunReport {
    std::string command;
    std::string scenario_name;
    std::string scenario_hash;
    std::vector<std::pair<std::string, std::string>> summary;
    std::vector<double> gains_db;  // per link, when the command has links
    std::vector<fs::path> artifacts;

    void add(const std::string& key, const std::string& value) { summary.emplace_back(key, value); }
    void add(const std::string& key, double value) { add(key, metamatch::detail::format_double(value)); }

    std::string value(const std::string& key) const {
        for (const auto& [k, v] : summary)
            if (k == key) return v;
        return {};
    }

    /// Artifact paths are printed relative to `base` when it is given.
    void write(std::ostream& os, const fs::path& base = {}) const {
        os << "command: " << command << '\n'
           << "scenario: " << scenario_name << '\n'
           << "scenario_hash: " << scenario_hash << '\n';
        std::size_t w = 0;
        for (const auto& [k, v] : summary) w = std::max(w, k.size());
        for (const auto& [k, v] : summary) os << std::left << std::setw(static_cast<int>(w) + 2) << k << v << '\n';
        for (const auto& a : artifacts)
            os << "artifact: " << (base.empty() ? a : a.lexically_relative(base)).generic_string() << '\n';
    }
};

namespace detail {

inline RunReport start_report(const std::string& command, const Scenario& s) {
    return {command, s.name, s.hash, {}, {}, {}};
}

template <class Writer>
void emit(RunReport& r, const fs::path& dir, const std::string& file, Writer&& w) {
    fs::create_directories(dir);
    const fs::path path = dir / file;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    w(os);
    r.artifacts.push_back(path);
}

inline void finish(RunReport& r, const fs::path& dir) {
    emit(r, dir, "summary_" + r.command + ".txt", [&](std::ostream& os) { r.write(os, dir); });
}

inline std::string axis_label(const SweepAxisSpec& a) {
    switch (a.kind) {
        case AxisKind::thickness_mm: return "thickness_mm";
        case AxisKind::susceptance_s: return "susceptance_s";
        case AxisKind::capacitance_pf: return "capacitance_pf";
        case AxisKind::voltage_v: return "voltage_v";
    }
    return "axis";
}

inline void apply_axis(const Scenario& s, const SweepAxisSpec& a, double x, GridPoint& p) {
    switch (a.kind) {
        case AxisKind::thickness_mm: p.stack.layers.at(a.layer).thickness = x * 1e-3; break;
        case AxisKind::susceptance_s: p.admittance = {0.0, x}; break;
        case AxisKind::capacitance_pf: {
            const auto st = varactor_for_capacitance(s.circuit.varactors, x * 1e-12);
            p.admittance = admittance_exact(s.circuit, st.capacitance, st.resistance, s.frequency).value +
                           s.circuit.coupling_offset;
            break;
        }
        case AxisKind::voltage_v: p.admittance = admittance_at_voltage(s.circuit, x, s.frequency).value; break;
    }
}

}  // namespace detail

inline StackFamily stack_family(const Scenario& s, const SweepSpec& spec) {
    return [&s, spec](double x1, double x2) {
        GridPoint p{s.stack, {0.0, 0.0}};
        detail::apply_axis(s, spec.axis1, x1, p);
        detail::apply_axis(s, spec.axis2, x2, p);
        return p;
    };
}

inline SweepResult run_sweep(const Scenario& s, const SweepSpec& spec, std::size_t threads = 1) {
    SweepGrid grid{{detail::axis_label(spec.axis1), spec.axis1.values},
                   {detail::axis_label(spec.axis2), spec.axis2.values},
                   s.frequency};
    return sweep_through_power(stack_family(s, spec), grid, threads);
}

// ---------------------------------------------------------------------------------------------
// match

struct MatchReport {
    MatchResult continuous;
    MatchResult discrete;
    std::vector<SpectrumPoint> matched_spectrum;
    double reduction_at_design_db = 0.0;
};

inline std::vector<double> spectrum_frequencies(const Scenario& s) {
    auto f = linear_axis("f", s.spectrum.start_hz, s.spectrum.stop_hz, s.spectrum.count).values;
    if (std::find(f.begin(), f.end(), s.frequency) == f.end()) {
        f.push_back(s.frequency);
        std::sort(f.begin(), f.end());
    }
    return f;
}

inline MatchReport compute_match(const Scenario& s) {
    MatchReport m;
    m.continuous = best_admittance(s.stack, s.frequency, s.search_span, s.search_steps);
    m.discrete = best_voltage(s.stack, s.circuit, s.frequency, s.voltages.values());
    const double f0[] = {s.frequency};
    m.reduction_at_design_db = reflection_spectrum(s.stack, m.continuous.best_admittance, f0).front().reduction_db;
    m.matched_spectrum = reflection_spectrum(s.stack, m.continuous.best_admittance, spectrum_frequencies(s));
    return m;
}

inline RunReport cmd_match(const Scenario& s, const RunOptions& o) {
    auto r = detail::start_report("match", s);
    const auto m = compute_match(s);
    r.add("best_susceptance_s", m.continuous.best_admittance.imag());
    r.add("through_power_db", m.continuous.through_power_db);
    r.add("baseline_db", m.continuous.baseline_db);
    r.add("gain_db", m.continuous.gain_db);
    r.add("reflection_reduction_db", m.reduction_at_design_db);
    r.add("best_voltage_v", *m.discrete.best_voltage);
    r.add("best_voltage_through_power_db", m.discrete.through_power_db);
    r.add("best_voltage_gain_db", m.discrete.gain_db);

    detail::emit(r, o.out_dir, "spectrum_matched.csv",
                 [&](std::ostream& os) { write_spectrum_csv(os, m.matched_spectrum); });
    const auto freqs = spectrum_frequencies(s);
    detail::emit(r, o.out_dir, "spectrum_voltages.csv", [&](std::ostream& os) {
        os << "voltage_v,frequency_hz,reflection_db,reduction_db\n";
        for (double v : s.voltages.values())
            for (const auto& p : reflection_spectrum(s.stack, VoltageDrive{s.circuit, v}, freqs))
                os << metamatch::detail::format_double(v) << ',' << metamatch::detail::format_double(p.frequency)
                   << ',' << metamatch::detail::format_double(p.reflection_db) << ','
                   << metamatch::detail::format_double(p.reduction_db) << '\n';
    });
    detail::finish(r, o.out_dir);
    return r;
}

// ---------------------------------------------------------------------------------------------
// sweep

inline RunReport cmd_sweep(const Scenario& s, const RunOptions& o) {
    if (s.sweeps.empty()) throw config_error("scenario defines no sweeps", 0);
    auto r = detail::start_report("sweep", s);
    for (const auto& spec : s.sweeps) {
        const auto res = run_sweep(s, spec, o.parallel);
        const double best = *std::max_element(res.through_power_db.begin(), res.through_power_db.end());
        r.add(spec.name + ".points", std::to_string(res.through_power_db.size()));
        r.add(spec.name + ".singular_points", std::to_string(res.singular_points));
        r.add(spec.name + ".max_through_power_db", best);
        detail::emit(r, o.out_dir, "sweep_" + spec.name + ".csv", [&](std::ostream& os) { write_sweep_csv(os, res); });
    }
    detail::finish(r, o.out_dir);
    return r;
}

// ---------------------------------------------------------------------------------------------
// links

struct LinkResult {
    std::size_t link = 0;
    std::uint64_t channel_seed = 0;
    double gain_db = 0.0;          // final config, noiseless
    double stage1_gain_db = 0.0;   // best uniform probe
    double stage12_gain_db = 0.0;  // best probe of stages 1-2
    std::array<std::size_t, 3> stage_probes{};
    ControlOutcome outcome;
};

inline std::uint64_t channel_seed(const Scenario& s, const RunOptions& o, std::size_t link) {
    return metamatch::detail::mix_seed(o.seed.value_or(s.seeds.channel), link);
}

inline ControllerParams controller_params(const Scenario& s, const ElementGroups& groups, std::size_t link) {
    ControllerParams p;
    p.voltages = s.voltages;
    p.groups = groups;
    p.rng_seed = metamatch::detail::mix_seed(s.seeds.controller, link);
    p.low_contrast_db = std::max(0.0, s.channel.noise.quantization_db);
    return p;
}

namespace detail {

// Noiseless gain of the highest-measured probe among the given stages.
inline double best_probe_gain(const ControlTrace& t, std::initializer_list<Stage> stages,
                              const MultipathChannel& ch, const ResponseTable& table) {
    const ProbeRecord* best = nullptr;
    for (const auto& rec : t.records())
        if (std::find(stages.begin(), stages.end(), rec.stage) != stages.end() &&
            (!best || rec.rss_db > best->rss_db))
            best = &rec;
    return best ? one_way_gain(ch, best->config, table) : 0.0;
}

}  // namespace detail

/// One controller run against one sampled channel.
inline LinkResult run_link(const Scenario& s, const ResponseTable& table, const ElementGroups& groups,
                           std::uint64_t ch_seed, std::size_t link) {
    LinkResult r;
    r.link = link;
    r.channel_seed = ch_seed;
    const auto ch = sample_channel(ch_seed, s.channel.params);
    ChannelOracle oracle(ch, table, s.channel.noise, metamatch::detail::mix_seed(s.seeds.noise, link));
    r.outcome = run_controller(std::ref(oracle), controller_params(s, groups, link));
    r.gain_db = one_way_gain(ch, r.outcome.config, table);
    r.stage1_gain_db = detail::best_probe_gain(r.outcome.trace, {Stage::uniform}, ch, table);
    r.stage12_gain_db = detail::best_probe_gain(r.outcome.trace, {Stage::uniform, Stage::voting}, ch, table);
    r.stage_probes = {r.outcome.trace.count(Stage::uniform), r.outcome.trace.count(Stage::voting),
                      r.outcome.trace.count(Stage::fine_tune)};
    return r;
}

inline std::vector<LinkResult> run_links(const Scenario& s, const RunOptions& o, std::size_t n_links) {
    const auto table = ResponseTable::from_scenario(s.surface(), s.voltages.values());
    const auto groups = ElementGroups::element_wise(s.array.elements());
    std::vector<LinkResult> out(n_links);
    metamatch::detail::parallel_for(n_links, o.parallel, [&](std::size_t k) {
        out[k] = run_link(s, table, groups, channel_seed(s, o, k), k);
    });
    return out;
}

namespace detail {

inline void add_distribution(RunReport& r, const std::string& prefix, const std::vector<double>& v) {
    r.add(prefix + "median_db", metamatch::detail::lower_percentile(v, 0.5));
    r.add(prefix + "p10_db", metamatch::detail::lower_percentile(v, 0.1));
    r.add(prefix + "p90_db", metamatch::detail::lower_percentile(v, 0.9));
    r.add(prefix + "max_db", v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()));
}

inline void write_cdf(std::ostream& os, std::vector<double> v) {
    std::sort(v.begin(), v.end());
    os << "gain_db,cdf\n";
    for (std::size_t i = 0; i < v.size(); ++i)
        os << metamatch::detail::format_double(v[i]) << ','
           << metamatch::detail::format_double(static_cast<double>(i + 1) / static_cast<double>(v.size())) << '\n';
}

}  // namespace detail

inline RunReport cmd_links(const Scenario& s, const RunOptions& o) {
    auto r = detail::start_report("links", s);
    const std::size_t n = o.links.value_or(s.links);
    const auto results = run_links(s, o, n);
    std::size_t max_probes = 0;
    for (const auto& l : results) {
        r.gains_db.push_back(l.gain_db);
        max_probes = std::max(max_probes, l.outcome.trace.size());
    }
    r.add("links", std::to_string(n));
    if (n) detail::add_distribution(r, "gain_", r.gains_db);
    r.add("max_probes_per_link", std::to_string(max_probes));
    r.add("probe_budget", std::to_string(controller_params(s, ElementGroups::element_wise(s.array.elements()), 0).cap()));

    detail::emit(r, o.out_dir, "links.csv", [&](std::ostream& os) {
        os << "link,channel_seed,gain_db,stage1_gain_db,stage12_gain_db,stage1_probes,stage2_probes,"
              "stage3_probes,final_config_hash\n";
        for (const auto& l : results)
            os << l.link << ',' << l.channel_seed << ',' << metamatch::detail::format_double(l.gain_db) << ','
               << metamatch::detail::format_double(l.stage1_gain_db) << ','
               << metamatch::detail::format_double(l.stage12_gain_db) << ',' << l.stage_probes[0] << ','
               << l.stage_probes[1] << ',' << l.stage_probes[2] << ',' << config_hash(l.outcome.config) << '\n';
    });
    detail::emit(r, o.out_dir, "links_cdf.csv", [&](std::ostream& os) { detail::write_cdf(os, r.gains_db); });
    for (const auto& l : results) {
        std::ostringstream name;
        name << "trace_link" << std::setw(3) << std::setfill('0') << l.link << ".csv";
        detail::emit(r, o.out_dir / "traces", name.str(), [&](std::ostream& os) { l.outcome.trace.write_csv(os); });
    }
    detail::finish(r, o.out_dir);
    return r;
}

// ---------------------------------------------------------------------------------------------
// backscatter

struct BackscatterLink {
    double one_way_gain_db = 0.0;
    double backscatter_gain_db = 0.0;
};

inline std::vector<BackscatterLink> run_backscatter(const Scenario& s, const RunOptions& o, std::size_t n_links) {
    const auto table = ResponseTable::from_scenario(s.surface(), s.voltages.values());
    const auto groups = ElementGroups::element_wise(s.array.elements());
    std::vector<BackscatterLink> out(n_links);
    metamatch::detail::parallel_for(n_links, o.parallel, [&](std::size_t k) {
        const std::uint64_t seed = channel_seed(s, o, k);
        const auto down = sample_channel(seed, s.channel.params);
        const auto up = s.backscatter_reciprocal
                            ? reciprocal_of(down)
                            : sample_channel(metamatch::detail::mix_seed(seed, 0xb5), s.channel.params);
        // Reciprocal links take one-way feedback; independent ones feed back the two-way product.
        ChannelOracle oracle(down, table, s.channel.noise, metamatch::detail::mix_seed(s.seeds.noise, k),
                             s.backscatter_reciprocal ? nullptr : &up);
        const auto res = run_controller(std::ref(oracle), controller_params(s, groups, k));
        out[k] = {one_way_gain(down, res.config, table), backscatter_gain(down, up, res.config, table)};
    });
    return out;
}

inline RunReport cmd_backscatter(const Scenario& s, const RunOptions& o) {
    auto r = detail::start_report("backscatter", s);
    const std::size_t n = o.links.value_or(s.links);
    const auto links = run_backscatter(s, o, n);
    std::vector<double> one_way;
    for (const auto& l : links) {
        one_way.push_back(l.one_way_gain_db);
        r.gains_db.push_back(l.backscatter_gain_db);
    }
    r.add("mode", s.backscatter_reciprocal ? "reciprocal" : "independent");
    r.add("links", std::to_string(n));
    if (n) {
        detail::add_distribution(r, "one_way_gain_", one_way);
        detail::add_distribution(r, "backscatter_gain_", r.gains_db);
    }
    detail::emit(r, o.out_dir, "backscatter.csv", [&](std::ostream& os) {
        os << "link,one_way_gain_db,backscatter_gain_db\n";
        for (std::size_t k = 0; k < links.size(); ++k)
            os << k << ',' << metamatch::detail::format_double(links[k].one_way_gain_db) << ','
               << metamatch::detail::format_double(links[k].backscatter_gain_db) << '\n';
    });
    detail::emit(r, o.out_dir, "backscatter_cdf.csv", [&](std::ostream& os) { detail::write_cdf(os, r.gains_db); });
    detail::finish(r, o.out_dir);
    return r;
}

// ---------------------------------------------------------------------------------------------
// bench-controller

struct BenchTrial {
    double element_gain_db = 0.0;       // 64 groups, 2N configs
    double column_gain_db = 0.0;        // column groups, 2 * cols configs
    double enumeration_gain_db = 0.0;   // 2^cols exhaustive over column on/off
    double stage12_gain_db = 0.0;       // element-wise, stages 1-2 only
    double stage3_increment_db = 0.0;   // element-wise, final minus stages 1-2
    std::array<std::size_t, 3> element_probes{};
    std::size_t enumeration_probes = 0;
};

inline std::vector<BenchTrial> run_bench(const Scenario& s, const RunOptions& o, std::size_t trials) {
    const auto table = ResponseTable::from_scenario(s.surface(), s.voltages.values());
    const auto elements = ElementGroups::element_wise(s.array.elements());
    const auto columns = ElementGroups::columns(s.array);
    std::vector<BenchTrial> out(trials);
    metamatch::detail::parallel_for(trials, o.parallel, [&](std::size_t k) {
        const std::uint64_t seed = channel_seed(s, o, k);
        BenchTrial t;
        const auto el = run_link(s, table, elements, seed, k);
        t.element_gain_db = el.gain_db;
        t.stage12_gain_db = el.stage12_gain_db;
        t.stage3_increment_db = el.gain_db - el.stage12_gain_db;
        t.element_probes = el.stage_probes;

        const auto col = run_link(s, table, columns, seed, k);
        t.column_gain_db = col.gain_db;

        const auto ch = sample_channel(seed, s.channel.params);
        ChannelOracle oracle(ch, table, s.channel.noise, metamatch::detail::mix_seed(s.seeds.noise, k));
        const auto en = brute_force_baseline(std::ref(oracle), columns, col.outcome.stage1.v1, col.outcome.stage1.v0);
        t.enumeration_gain_db = one_way_gain(ch, en.config, table);
        t.enumeration_probes = en.probes;
        out[k] = t;
    });
    return out;
}

inline RunReport cmd_bench_controller(const Scenario& s, const RunOptions& o) {
    auto r = detail::start_report("bench-controller", s);
    const std::size_t n = o.links.value_or(s.bench_trials);
    const auto trials = run_bench(s, o, n);
    std::vector<double> el, col, en, s12, s3;
    for (const auto& t : trials) {
        el.push_back(t.element_gain_db);
        col.push_back(t.column_gain_db);
        en.push_back(t.enumeration_gain_db);
        s12.push_back(t.stage12_gain_db);
        s3.push_back(t.stage3_increment_db);
    }
    r.gains_db = el;
    r.add("trials", std::to_string(n));
    if (n) {
        using metamatch::detail::lower_percentile;
        r.add("element_voting_median_db", lower_percentile(el, 0.5));
        r.add("column_voting_median_db", lower_percentile(col, 0.5));
        r.add("column_enumeration_median_db", lower_percentile(en, 0.5));
        r.add("stage12_median_db", lower_percentile(s12, 0.5));
        r.add("stage3_increment_median_db", lower_percentile(s3, 0.5));
        r.add("element_probes_stage1", std::to_string(trials.front().element_probes[0]));
        r.add("element_probes_stage2", std::to_string(trials.front().element_probes[1]));
        r.add("element_probes_stage3_max",
              std::to_string(std::max_element(trials.begin(), trials.end(), [](const auto& a, const auto& b) {
                                 return a.element_probes[2] < b.element_probes[2];
                             })->element_probes[2]));
        r.add("enumeration_probes", std::to_string(trials.front().enumeration_probes));
    }
    detail::emit(r, o.out_dir, "bench.csv", [&](std::ostream& os) {
        os << "trial,element_gain_db,column_gain_db,enumeration_gain_db,stage12_gain_db,stage3_increment_db,"
              "stage1_probes,stage2_probes,stage3_probes,enumeration_probes\n";
        for (std::size_t k = 0; k < trials.size(); ++k) {
            const auto& t = trials[k];
            using metamatch::detail::format_double;
            os << k << ',' << format_double(t.element_gain_db) << ',' << format_double(t.column_gain_db) << ','
               << format_double(t.enumeration_gain_db) << ',' << format_double(t.stage12_gain_db) << ','
               << format_double(t.stage3_increment_db) << ',' << t.element_probes[0] << ',' << t.element_probes[1]
               << ',' << t.element_probes[2] << ',' << t.enumeration_probes << '\n';
        }
    });
    detail::finish(r, o.out_dir);
    return r;
}

}  // namespace metamatch::harness

#endif  // METAMATCH_HARNESS_COMMANDS_HPP
