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

#ifndef METAMATCH_CHANNEL_HPP
#define METAMATCH_CHANNEL_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "metamatch/cascade.hpp"
#include "metamatch/detail/util.hpp"
#include "metamatch/surface.hpp"

namespace metamatch {

/// Per-element bias voltages, element i at index i.
struct SurfaceConfig {
    std::vector<double> voltages;

    static SurfaceConfig uniform(std::size_t n, double v) { return {std::vector<double>(n, v)}; }
    std::size_t size() const { return voltages.size(); }
    bool operator==(const SurfaceConfig&) const = default;
};

/// Voltages joined by ',' in shortest round-trip decimal form.
inline std::string canonical_form(const SurfaceConfig& c) {
    std::string s;
    for (std::size_t i = 0; i < c.voltages.size(); ++i) {
        if (i) s += ',';
        s += detail::format_double(c.voltages[i]);
    }
    return s;
}

/// FNV-1a 64 of the canonical form, as 16 lowercase hex digits.
inline std::string config_hash(const SurfaceConfig& c) {
    return detail::hex64(detail::fnv1a(canonical_form(c)));
}

struct ArrayGeometry {
    std::size_t rows = 8;
    std::size_t cols = 8;
    std::size_t elements() const { return rows * cols; }
};

/// Physical setting that turns a bias voltage into an element response s(V).
struct SurfaceScenario {
    StackSpec stack;
    ElementCircuit circuit;
    double frequency = kDefaultFrequency;
};

/// s(V): end-to-end field transmission T of the stack with the element biased at V.
/// Every element shares it (infinite-surface approximation).
inline complex element_response(const SurfaceScenario& s, double voltage) {
    const auto y = admittance_at_voltage(s.circuit, voltage, s.frequency);
    return solve_stack(s.stack, y.value, s.frequency).t;
}

/// Response with no surface at all (Y_s = 0); the gain baseline.
inline complex bare_response(const SurfaceScenario& s) {
    return solve_stack(s.stack, 0.0, s.frequency).t;
}

/// s(V) tabulated on a fixed voltage alphabet.
class ResponseTable {
public:
    ResponseTable(std::vector<std::pair<double, complex>> entries, complex bare)
        : entries_(std::move(entries)), bare_(bare) {
        if (entries_.empty()) throw invalid_argument("response table needs at least one voltage");
        lo_ = hi_ = entries_.front().first;
        for (const auto& [v, s] : entries_) {
            lo_ = std::min(lo_, v);
            hi_ = std::max(hi_, v);
        }
    }

    static ResponseTable from_scenario(const SurfaceScenario& s, std::span<const double> voltages) {
        std::vector<std::pair<double, complex>> e;
        for (double v : voltages) e.emplace_back(v, element_response(s, v));
        return {std::move(e), bare_response(s)};
    }

    complex operator()(double voltage) const {
        for (const auto& [v, s] : entries_)
            if (v == voltage) return s;
        throw range_error("voltage " + std::to_string(voltage) + " V not in the response table");
    }

    // Jitter scale: 0 at the highest tabulated voltage, 1 at the lowest.
    double jitter_weight(double voltage) const {
        return hi_ > lo_ ? (hi_ - voltage) / (hi_ - lo_) : 0.0;
    }

    complex bare() const { return bare_; }
    const std::vector<std::pair<double, complex>>& entries() const { return entries_; }

private:
    std::vector<std::pair<double, complex>> entries_;
    complex bare_;
    double lo_ = 0.0, hi_ = 0.0;
};

struct ChannelParams {
    std::size_t elements = 64;
    double env_power = 0.2;
    // Per-element variance; overridden element-wise by element_power_profile when non-empty.
    double element_power = 1.0 / 64.0;
    std::vector<double> element_power_profile;
    // Std-dev (rad) of per-element response phase offsets that grow as bias drops.
    double phase_jitter_rad = 0.0;
};

struct MultipathChannel {
    complex h_env;
    std::vector<complex> h_elements;
    std::vector<double> phase_jitter;
    std::uint64_t seed = 0;

    std::size_t size() const { return h_elements.size(); }
};

inline void validate(const ChannelParams& p) {
    if (p.elements == 0) throw invalid_argument("channel needs at least one element");
    if (!(p.env_power >= 0.0) || !std::isfinite(p.env_power))
        throw invalid_argument("env_power must be >= 0");
    if (!(p.element_power >= 0.0) || !std::isfinite(p.element_power))
        throw invalid_argument("element_power must be >= 0");
    if (!p.element_power_profile.empty() && p.element_power_profile.size() != p.elements)
        throw invalid_argument("element_power_profile length differs from element count");
    for (double v : p.element_power_profile)
        if (!(v >= 0.0) || !std::isfinite(v)) throw invalid_argument("element powers must be >= 0");
    if (!(p.phase_jitter_rad >= 0.0) || !std::isfinite(p.phase_jitter_rad))
        throw invalid_argument("phase_jitter_rad must be >= 0");
}

namespace detail {

inline complex complex_gaussian(Rng& rng, double variance) {
    if (variance == 0.0) {
        rng.normal();
        rng.normal();
        return {0.0, 0.0};
    }
    const double s = std::sqrt(variance / 2.0);
    const double re = rng.normal();
    return {s * re, s * rng.normal()};
}

}  // namespace detail

/// Rayleigh multipath: h_env and every h_i circularly-symmetric complex Gaussian.
inline MultipathChannel sample_channel(std::uint64_t seed, const ChannelParams& p) {
    validate(p);
    detail::Rng rng(seed);
    MultipathChannel ch;
    ch.seed = seed;
    ch.h_env = detail::complex_gaussian(rng, p.env_power);
    ch.h_elements.reserve(p.elements);
    for (std::size_t i = 0; i < p.elements; ++i)
        ch.h_elements.push_back(detail::complex_gaussian(
            rng, p.element_power_profile.empty() ? p.element_power : p.element_power_profile[i]));
    ch.phase_jitter.assign(p.elements, 0.0);
    if (p.phase_jitter_rad > 0.0)
        for (auto& phi : ch.phase_jitter) phi = p.phase_jitter_rad * rng.normal();
    return ch;
}

/// h_env + sum_i s_i(V_i) h_i.
inline complex composite_channel(const MultipathChannel& ch, const SurfaceConfig& config,
                                 const ResponseTable& s) {
    if (config.size() != ch.size())
        throw invalid_argument("surface config length " + std::to_string(config.size()) +
                               " differs from channel element count " + std::to_string(ch.size()));
    complex h = ch.h_env;
    for (std::size_t i = 0; i < ch.size(); ++i) {
        const double v = config.voltages[i];
        complex si = s(v);
        if (!ch.phase_jitter.empty() && ch.phase_jitter[i] != 0.0)
            si *= std::polar(1.0, ch.phase_jitter[i] * s.jitter_weight(v));
        h += si * ch.h_elements[i];
    }
    return h;
}

/// The channel with the surface removed.
inline complex baseline_channel(const MultipathChannel& ch, const ResponseTable& s) {
    complex sum{0.0, 0.0};
    for (const auto& h : ch.h_elements) sum += h;
    return ch.h_env + s.bare() * sum;
}

inline double amplitude_db(complex h) {
    const double a = std::abs(h);
    return a > 0.0 ? 20.0 * std::log10(a) : -std::numeric_limits<double>::infinity();
}

struct FeedbackNoise {
    std::optional<double> noise_db;  // complex Gaussian power in dB; nullopt = noiseless
    double quantization_db = 0.0;    // report resolution; 0 = continuous
};

struct FeedbackSample {
    double rss_db = 0.0;
    std::uint64_t noise_seed = 0;
    SurfaceConfig config;
};

namespace detail {

inline double measure(complex h, const FeedbackNoise& noise, std::uint64_t noise_seed) {
    if (noise.noise_db) {
        Rng rng(noise_seed);
        h += complex_gaussian(rng, std::pow(10.0, *noise.noise_db / 10.0));
    }
    double rss = amplitude_db(h);
    if (noise.quantization_db > 0.0 && std::isfinite(rss))
        rss = std::round(rss / noise.quantization_db) * noise.quantization_db;
    return rss;
}

}  // namespace detail

inline FeedbackSample rss_feedback(const MultipathChannel& ch, const SurfaceConfig& config,
                                   const ResponseTable& s, const FeedbackNoise& noise,
                                   std::uint64_t noise_seed) {
    return {detail::measure(composite_channel(ch, config, s), noise, noise_seed), noise_seed, config};
}

/// One-way surface gain in dB against the no-surface baseline.
inline double one_way_gain(const MultipathChannel& ch, const SurfaceConfig& config, const ResponseTable& s) {
    return amplitude_db(composite_channel(ch, config, s)) - amplitude_db(baseline_channel(ch, s));
}

/// Two-way (backscatter) gain: product of both directions against the product of baselines.
inline double backscatter_gain(const MultipathChannel& down, const MultipathChannel& up,
                               const SurfaceConfig& config, const ResponseTable& s) {
    if (down.size() != up.size()) throw invalid_argument("downlink and uplink element counts differ");
    return one_way_gain(down, config, s) + one_way_gain(up, config, s);
}

/// Physical reciprocity: the uplink sees the same path coefficients.
inline MultipathChannel reciprocal_of(const MultipathChannel& down) { return down; }

/// Feedback oracle over a sampled channel. Each probe draws its noise from a fresh seed
/// derived from (noise_seed, probe index), so a run replays bit-identically.
class ChannelOracle {
public:
    ChannelOracle(const MultipathChannel& ch, const ResponseTable& s, FeedbackNoise noise,
                  std::uint64_t noise_seed, const MultipathChannel* uplink = nullptr)
        : ch_(&ch), up_(uplink), s_(&s), noise_(noise), seed_(noise_seed) {}

    double operator()(const SurfaceConfig& config) {
        const std::uint64_t ns = detail::mix_seed(seed_, probes_++);
        complex h = composite_channel(*ch_, config, *s_);
        if (up_) h *= composite_channel(*up_, config, *s_);
        return detail::measure(h, noise_, ns);
    }

    std::size_t probes() const { return probes_; }

private:
    const MultipathChannel* ch_;
    const MultipathChannel* up_;
    const ResponseTable* s_;
    FeedbackNoise noise_;
    std::uint64_t seed_;
    std::size_t probes_ = 0;
};

/// `path,re,im` with the environment path first, then elements by index.
inline void write_channel_csv(std::ostream& os, const MultipathChannel& ch) {
    os << "path,re,im\n";
    os << "env," << detail::format_double(ch.h_env.real()) << ',' << detail::format_double(ch.h_env.imag())
       << '\n';
    for (std::size_t i = 0; i < ch.size(); ++i)
        os << i << ',' << detail::format_double(ch.h_elements[i].real()) << ','
           << detail::format_double(ch.h_elements[i].imag()) << '\n';
}

}  // namespace metamatch

#endif  // METAMATCH_CHANNEL_HPP
