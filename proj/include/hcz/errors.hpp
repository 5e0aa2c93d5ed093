// Copyright 2026 The hcz Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace hcz {

/// Invalid argument to a library call (bad label, unnormalized input, ...).
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Non-finite values, zero-norm projections, trace drift.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Internal inconsistency detected while sampling (should never fire).
struct ConsistencyError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Dangling or doubly-consumed port in an optics netlist.
struct TopologyError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Mode transform failed the unitarity check.
struct CalibrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A protocol stage was called with a pattern it does not accept.
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Text input could not be parsed. Line and column are 1-based.
struct ParseError : std::runtime_error {
    ParseError(const std::string &what, int line, int column)
        : std::runtime_error(
              "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
          line(line),
          column(column) {
    }
    int line;
    int column;
};

/// A parsed value violates a documented constraint.
struct ValidationError : std::invalid_argument {
    ValidationError(const std::string &field, const std::string &constraint)
        : std::invalid_argument(field + " must satisfy " + constraint), field(field) {
    }
    std::string field;
};

}  // namespace hcz
