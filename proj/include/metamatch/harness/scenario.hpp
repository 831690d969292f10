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

#ifndef METAMATCH_HARNESS_SCENARIO_HPP
#define METAMATCH_HARNESS_SCENARIO_HPP

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "metamatch.hpp"

namespace metamatch::harness {

/// What a sweep axis varies. The unit is part of the kind name.
enum class AxisKind { thickness_mm, susceptance_s, capacitance_pf, voltage_v };

struct SweepAxisSpec {
    AxisKind kind = AxisKind::susceptance_s;
    std::size_t layer = 0;  // thickness_mm only
    std::vector<double> values;
};

struct SweepSpec {
    std::string name;
    SweepAxisSpec axis1;
    SweepAxisSpec axis2;
};

struct SpectrumSpec {
    double start_hz = 1.8e9;
    double stop_hz = 3.0e9;
    std::size_t count = 121;
};

struct ChannelDefaults {
    ChannelParams params;
    FeedbackNoise noise{-40.0, 0.1};
};

struct Seeds {
    std::uint64_t channel = 1;
    std::uint64_t controller = 2;
    std::uint64_t noise = 3;
};

/// Everything one run needs; re-running the same file replays bit-identically.
struct Scenario {
    std::string name = "scenario";
    double frequency = kDefaultFrequency;
    StackSpec stack = stacks::air_water();
    ElementCircuit circuit;
    ArrayGeometry array;
    VoltageSet voltages;
    ChannelDefaults channel;
    Seeds seeds;
    SusceptanceSpan search_span = kDefaultSearchSpan;
    std::size_t search_steps = kDefaultSearchSteps;
    SpectrumSpec spectrum;
    std::vector<SweepSpec> sweeps;
    std::size_t links = 45;
    std::size_t bench_trials = 100;
    bool backscatter_reciprocal = true;
    std::string hash;  // FNV-1a of the source text

    SurfaceScenario surface() const { return {stack, circuit, frequency}; }
};

// Default circuit: the calibrated (L1, L2) for the reference varactor table at 2.4 GHz,
// target span 0 .. 0.1 S.
inline ElementCircuit default_circuit() {
    static const ElementCircuit c = calibrate_inductances(reference_varactor_table(), kDefaultFrequency);
    return c;
}

namespace detail {

inline int line_of(const YAML::Node& n) { return n.Mark().is_null() ? 0 : n.Mark().line + 1; }

template <class T>
T as(const YAML::Node& n, const std::string& what) {
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        throw config_error("bad value for '" + what + "'", line_of(n));
    }
}

template <class T>
T get(const YAML::Node& parent, const std::string& key, T fallback) {
    const YAML::Node n = parent[key];
    if (!n || n.IsNull()) return fallback;
    return as<T>(n, key);
}

inline void reject_unknown(const YAML::Node& node, std::initializer_list<const char*> keys,
                           const std::string& where) {
    if (!node.IsMap()) throw config_error("'" + where + "' must be a mapping", line_of(node));
    for (const auto& kv : node) {
        const auto k = kv.first.as<std::string>();
        bool known = false;
        for (const char* key : keys) known = known || k == key;
        if (!known) throw config_error("unknown key '" + k + "' in " + where, line_of(kv.first));
    }
}

inline Medium parse_medium(const YAML::Node& n, const std::map<std::string, Medium>& registry) {
    if (n.IsScalar()) {
        const auto name = n.as<std::string>();
        if (auto it = registry.find(name); it != registry.end()) return it->second;
        throw config_error("unknown medium '" + name + "'", line_of(n));
    }
    reject_unknown(n, {"name", "relative_permittivity", "relative_permeability", "conductivity_s_per_m"},
                   "medium");
    Medium m{get<std::string>(n, "name", "custom"), get<double>(n, "relative_permittivity", 1.0),
             get<double>(n, "relative_permeability", 1.0), get<double>(n, "conductivity_s_per_m", 0.0)};
    try {
        validate(m);
    } catch (const std::exception& e) {
        throw config_error(e.what(), line_of(n));
    }
    return m;
}

inline std::vector<double> parse_values(const YAML::Node& n, const std::string& what) {
    if (n["values"]) return as<std::vector<double>>(n["values"], what + ".values");
    if (!n["start"] || !n["stop"] || !n["count"])
        throw config_error(what + " needs 'values' or 'start'/'stop'/'count'", line_of(n));
    return linear_axis("", as<double>(n["start"], "start"), as<double>(n["stop"], "stop"),
                       as<std::size_t>(n["count"], "count"))
        .values;
}

inline SweepAxisSpec parse_axis(const YAML::Node& n, const std::string& what, std::size_t layers) {
    reject_unknown(n, {"kind", "layer", "values", "start", "stop", "count"}, what);
    SweepAxisSpec a;
    const auto kind = get<std::string>(n, "kind", "");
    if (kind == "thickness_mm") a.kind = AxisKind::thickness_mm;
    else if (kind == "susceptance_s") a.kind = AxisKind::susceptance_s;
    else if (kind == "capacitance_pf") a.kind = AxisKind::capacitance_pf;
    else if (kind == "voltage_v") a.kind = AxisKind::voltage_v;
    else throw config_error(what + ": kind must be thickness_mm, susceptance_s, capacitance_pf or voltage_v",
                            line_of(n));
    a.layer = get<std::size_t>(n, "layer", 0);
    if (a.kind == AxisKind::thickness_mm && a.layer >= layers)
        throw config_error(what + ": layer index out of range", line_of(n));
    a.values = parse_values(n, what);
    try {
        validate(SweepAxis{what, a.values});
    } catch (const std::exception& e) {
        throw config_error(e.what(), line_of(n));
    }
    return a;
}

}  // namespace detail

inline Scenario parse_scenario(const std::string& text) {
    using namespace detail;
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw config_error(e.msg, e.mark.line + 1);
    }
    Scenario s;
    s.hash = metamatch::detail::hex64(metamatch::detail::fnv1a(text));
    if (!root || root.IsNull()) return s;
    reject_unknown(root,
                   {"name", "frequency_hz", "media", "stack", "circuit", "array", "voltage_set_v", "channel",
                    "seeds", "match", "sweeps", "links", "bench_trials", "backscatter"},
                   "scenario");

    s.name = get<std::string>(root, "name", s.name);
    s.frequency = get<double>(root, "frequency_hz", s.frequency);
    if (!(s.frequency > 0.0)) throw config_error("frequency_hz must be positive", line_of(root["frequency_hz"]));

    std::map<std::string, Medium> registry;
    for (auto m : {media::air(), media::water(), media::skin(), media::fat(), media::muscle()})
        registry[m.name] = m;
    if (const auto ms = root["media"]) {
        if (!ms.IsSequence()) throw config_error("'media' must be a list", line_of(ms));
        for (const auto& m : ms) {
            const auto med = parse_medium(m, registry);
            registry[med.name] = med;
        }
    }

    if (const auto st = root["stack"]) {
        reject_unknown(st, {"source", "load", "surface_index", "layers"}, "stack");
        StackSpec stack;
        stack.source_medium = st["source"] ? parse_medium(st["source"], registry) : media::air();
        stack.load_medium = st["load"] ? parse_medium(st["load"], registry) : media::air();
        if (const auto ls = st["layers"]) {
            if (!ls.IsSequence()) throw config_error("'stack.layers' must be a list", line_of(ls));
            for (const auto& l : ls) {
                reject_unknown(l, {"medium", "thickness_mm"}, "layer");
                if (!l["medium"] || !l["thickness_mm"])
                    throw config_error("layer needs 'medium' and 'thickness_mm'", line_of(l));
                Layer layer{parse_medium(l["medium"], registry), as<double>(l["thickness_mm"], "thickness_mm") * 1e-3};
                if (!(layer.thickness > 0.0)) throw config_error("thickness_mm must be > 0", line_of(l));
                stack.layers.push_back(layer);
            }
        }
        stack.surface_index = get<std::size_t>(st, "surface_index", 0);
        if (stack.surface_index > stack.layers.size())
            throw config_error("surface_index past the last layer", line_of(st));
        s.stack = stack;
    }

    s.circuit = default_circuit();
    if (const auto c = root["circuit"]) {
        reject_unknown(c, {"patch_inductance_nh", "bias_wire_inductance_nh", "calibrate", "coupling_offset_s"},
                       "circuit");
        if (const auto cal = c["calibrate"]) {
            reject_unknown(cal, {"min_susceptance_s", "max_susceptance_s"}, "circuit.calibrate");
            SusceptanceSpan target{get<double>(cal, "min_susceptance_s", 0.0),
                                   get<double>(cal, "max_susceptance_s", 0.1)};
            try {
                s.circuit = calibrate_inductances(reference_varactor_table(), s.frequency, target);
            } catch (const calibration_error&) {
                throw;
            } catch (const std::exception& e) {
                throw config_error(e.what(), line_of(cal));
            }
        } else if (c["patch_inductance_nh"] || c["bias_wire_inductance_nh"]) {
            s.circuit.patch_inductance = get<double>(c, "patch_inductance_nh", 0.0) * 1e-9;
            s.circuit.bias_wire_inductance = get<double>(c, "bias_wire_inductance_nh", 0.0) * 1e-9;
            s.circuit.design_frequency = s.frequency;
        }
        if (const auto off = c["coupling_offset_s"]) {
            reject_unknown(off, {"re", "im"}, "coupling_offset_s");
            s.circuit.coupling_offset = {get<double>(off, "re", 0.0), get<double>(off, "im", 0.0)};
        }
        try {
            validate(s.circuit);
        } catch (const std::exception& e) {
            throw config_error(e.what(), line_of(c));
        }
    }

    if (const auto a = root["array"]) {
        reject_unknown(a, {"rows", "cols"}, "array");
        s.array = {get<std::size_t>(a, "rows", 8), get<std::size_t>(a, "cols", 8)};
        if (s.array.elements() == 0) throw config_error("array must have at least one element", line_of(a));
    }
    s.channel.params.elements = s.array.elements();
    s.channel.params.element_power = 1.0 / static_cast<double>(s.array.elements());

    if (const auto v = root["voltage_set_v"]) {
        try {
            s.voltages = VoltageSet(as<std::vector<double>>(v, "voltage_set_v"));
            s.voltages.check_within(s.circuit.varactors);
        } catch (const config_error&) {
            throw;
        } catch (const std::exception& e) {
            throw config_error(e.what(), line_of(v));
        }
    }

    if (const auto ch = root["channel"]) {
        reject_unknown(ch, {"env_power", "element_power", "phase_jitter_rad", "noise_db", "quantization_db"},
                       "channel");
        auto& p = s.channel.params;
        p.env_power = get<double>(ch, "env_power", p.env_power);
        p.element_power = get<double>(ch, "element_power", p.element_power);
        p.phase_jitter_rad = get<double>(ch, "phase_jitter_rad", p.phase_jitter_rad);
        if (ch["noise_db"]) {
            if (ch["noise_db"].IsNull()) s.channel.noise.noise_db.reset();
            else s.channel.noise.noise_db = as<double>(ch["noise_db"], "noise_db");
        }
        s.channel.noise.quantization_db = get<double>(ch, "quantization_db", s.channel.noise.quantization_db);
        try {
            validate(p);
        } catch (const std::exception& e) {
            throw config_error(e.what(), line_of(ch));
        }
    }

    if (const auto sd = root["seeds"]) {
        reject_unknown(sd, {"channel", "controller", "noise"}, "seeds");
        s.seeds = {get<std::uint64_t>(sd, "channel", s.seeds.channel),
                   get<std::uint64_t>(sd, "controller", s.seeds.controller),
                   get<std::uint64_t>(sd, "noise", s.seeds.noise)};
    }

    if (const auto m = root["match"]) {
        reject_unknown(m, {"susceptance_min_s", "susceptance_max_s", "steps", "spectrum_hz"}, "match");
        s.search_span = {get<double>(m, "susceptance_min_s", s.search_span.min),
                         get<double>(m, "susceptance_max_s", s.search_span.max)};
        s.search_steps = get<std::size_t>(m, "steps", s.search_steps);
        if (!(s.search_span.min < s.search_span.max) || s.search_steps < 2)
            throw config_error("match: need susceptance_min_s < susceptance_max_s and steps >= 2", line_of(m));
        if (const auto sp = m["spectrum_hz"]) {
            reject_unknown(sp, {"start", "stop", "count"}, "match.spectrum_hz");
            s.spectrum = {get<double>(sp, "start", s.spectrum.start_hz), get<double>(sp, "stop", s.spectrum.stop_hz),
                          get<std::size_t>(sp, "count", s.spectrum.count)};
            if (!(s.spectrum.start_hz > 0.0) || !(s.spectrum.stop_hz > s.spectrum.start_hz) || s.spectrum.count < 2)
                throw config_error("match.spectrum_hz: need 0 < start < stop and count >= 2", line_of(sp));
        }
    }

    if (const auto sw = root["sweeps"]) {
        if (!sw.IsSequence()) throw config_error("'sweeps' must be a list", line_of(sw));
        for (const auto& n : sw) {
            reject_unknown(n, {"name", "axis1", "axis2"}, "sweep");
            if (!n["axis1"] || !n["axis2"]) throw config_error("sweep needs axis1 and axis2", line_of(n));
            SweepSpec spec{get<std::string>(n, "name", "sweep" + std::to_string(s.sweeps.size())),
                           parse_axis(n["axis1"], "axis1", s.stack.layers.size()),
                           parse_axis(n["axis2"], "axis2", s.stack.layers.size())};
            s.sweeps.push_back(std::move(spec));
        }
    }

    s.links = get<std::size_t>(root, "links", s.links);
    s.bench_trials = get<std::size_t>(root, "bench_trials", s.bench_trials);
    if (const auto b = root["backscatter"]) {
        reject_unknown(b, {"mode"}, "backscatter");
        const auto mode = get<std::string>(b, "mode", "reciprocal");
        if (mode != "reciprocal" && mode != "independent")
            throw config_error("backscatter.mode must be 'reciprocal' or 'independent'", line_of(b));
        s.backscatter_reciprocal = mode == "reciprocal";
    }
    return s;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open scenario file '" + path + "'", 0);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

}  // namespace metamatch::harness

#endif  // METAMATCH_HARNESS_SCENARIO_HPP
