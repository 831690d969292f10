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

#ifndef METAMATCH_ERRORS_HPP
#define METAMATCH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace metamatch {

// Every error carries the CLI exit code it maps to:
// 2 config, 3 infeasible search/calibration, 4 oracle/budget violation.

struct invalid_argument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Lookup outside a table (no extrapolation).
struct range_error : std::out_of_range {
    using std::out_of_range::out_of_range;
};

// Eq-4 denominator vanished; the stack sits on a resonance singularity.
struct degenerate_stack_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// 1 - w^2 C L1 <= 0 in the element circuit.
struct resonance_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct calibration_error : std::runtime_error {
    calibration_error(const std::string& what, double best_min, double best_max)
        : std::runtime_error(what), best_span_min(best_min), best_span_max(best_max) {}
    double best_span_min;
    double best_span_max;
};

struct search_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct budget_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct config_error : std::runtime_error {
    config_error(const std::string& what, int line_number)
        : std::runtime_error(line_number > 0 ? "line " + std::to_string(line_number) + ": " + what
                                             : what),
          line(line_number) {}
    int line;
};

}  // namespace metamatch

#endif  // METAMATCH_ERRORS_HPP
