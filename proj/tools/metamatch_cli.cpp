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

// Command-line front end: metamatch <match|sweep|links|backscatter|bench-controller> --scenario <file>

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "metamatch/harness/commands.hpp"

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kInfeasible = 3, kBudget = 4 };

}  // namespace

int main(int argc, char** argv) {
    using namespace metamatch;
    using namespace metamatch::harness;

    CLI::App app{"Media-matching metasurface simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    RunOptions opts;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    std::size_t links = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--scenario", scenario_path, "Scenario file (YAML)")->required();
        sub->add_option("--out", out_dir, "Output directory for CSV files and the summary");
        sub->add_option("--seed", seed, "Override the scenario's channel seed");
        sub->add_option("--parallel", opts.parallel, "Worker threads (results do not depend on it)")
            ->check(CLI::PositiveNumber);
    };

    auto* match = app.add_subcommand("match", "Best admittance/voltage and reflection spectra");
    auto* sweep = app.add_subcommand("sweep", "Through-power heatmaps over the scenario's sweep grids");
    auto* link_cmd = app.add_subcommand("links", "Controller runs over seeded multipath links");
    auto* backscatter = app.add_subcommand("backscatter", "Two-way backscatter gain emulation");
    auto* bench = app.add_subcommand("bench-controller", "Voting vs enumeration vs column control");
    for (auto* sub : {match, sweep, link_cmd, backscatter, bench}) add_common(sub);
    for (auto* sub : {link_cmd, backscatter, bench})
        sub->add_option("--links", links, "Number of links (trials for bench-controller)");

    CLI11_PARSE(app, argc, argv);

    try {
        const Scenario s = load_scenario(scenario_path);
        opts.out_dir = out_dir;
        const CLI::App* active = app.get_subcommands().front();
        if (active->count("--seed")) opts.seed = seed;
        if (active != match && active != sweep && active->count("--links")) opts.links = links;

        RunReport report;
        if (*match) report = cmd_match(s, opts);
        else if (*sweep) report = cmd_sweep(s, opts);
        else if (*link_cmd) report = cmd_links(s, opts);
        else if (*backscatter) report = cmd_backscatter(s, opts);
        else report = cmd_bench_controller(s, opts);
        report.write(std::cout);
        return kOk;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const calibration_error& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const search_error& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const budget_error& e) {
        std::cerr << "budget violation: " << e.what() << '\n';
        return kBudget;
    } catch (const oracle_error& e) {
        std::cerr << "oracle failure after " << e.partial_trace.size() << " probes: " << e.what() << '\n';
        return kBudget;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
}
