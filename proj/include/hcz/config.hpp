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

// Run configuration: flat `key = value` lines grouped under [section]
// headers. `#` starts a comment. Unknown sections and keys are errors.
//
//   mode = sweep            # gate | sweep | mc | verify
//   output = out.csv
//   pattern = D1D3          # gate mode; "all" for the four heralding pairs
//   dump = heralded.jsonl   # gate mode, optional amplitude dump
//
//   [params]                omega kappa tau t_detect phi1 phi2 eta fock_cutoff
//   [inputs]                alpha1 beta1 alpha2 beta2, complex ("0.6", "0.8i", "0.6-0.8i")
//   [sweep]                 axis = <field> <start> <stop> <count> [linear|log], repeatable
//   [mc]                    n_trajectories base_seed log
//   [optics]                netlist export

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hcz/dynamics.hpp"
#include "hcz/errors.hpp"
#include "hcz/protocol.hpp"

namespace hcz {

enum class RunMode { gate, sweep, mc, verify };

inline std::string mode_name(RunMode m) {
    switch (m) {
        case RunMode::gate:
            return "gate";
        case RunMode::sweep:
            return "sweep";
        case RunMode::mc:
            return "mc";
        case RunMode::verify:
            return "verify";
    }
    return "?";
}

enum class AxisScale { linear, log };

struct SweepAxis {
    std::string field;
    double start = 0.0;
    double stop = 0.0;
    int count = 1;
    AxisScale scale = AxisScale::linear;

    /// Grid values with both endpoints included exactly.
    std::vector<double> values() const {
        std::vector<double> v(static_cast<std::size_t>(count));
        if (count == 1) {
            v[0] = start;
            return v;
        }
        for (int k = 0; k < count; ++k) {
            double f = static_cast<double>(k) / (count - 1);
            v[static_cast<std::size_t>(k)] = scale == AxisScale::linear
                                                 ? start + f * (stop - start)
                                                 : std::exp(std::log(start) + f * (std::log(stop) - std::log(start)));
        }
        v.front() = start;
        v.back() = stop;
        return v;
    }
};

inline const std::vector<std::string> &sweepable_fields() {
    static const std::vector<std::string> f{"omega", "kappa", "tau", "t_detect", "phi1", "phi2", "eta", "fock_cutoff"};
    return f;
}

/// Sets one named field; fock_cutoff must be integral.
inline void set_param(SystemParams &p, const std::string &field, double value) {
    if (field == "omega") {
        p.omega = value;
    } else if (field == "kappa") {
        p.kappa = value;
    } else if (field == "tau") {
        p.tau = value;
    } else if (field == "t_detect") {
        p.t_detect = value;
    } else if (field == "phi1") {
        p.phi1 = value;
    } else if (field == "phi2") {
        p.phi2 = value;
    } else if (field == "eta") {
        p.eta = value;
    } else if (field == "fock_cutoff") {
        if (value != std::floor(value) || std::abs(value) > 64) throw ValidationError("fock_cutoff", "an integer >= 1");
        p.fock_cutoff = static_cast<int>(value);
    } else {
        throw ArgumentError("unknown parameter '" + field + "'");
    }
}

struct RunConfig {
    RunMode mode = RunMode::gate;
    SystemParams params;
    AtomInputs inputs;
    std::vector<SweepAxis> sweep_axes;
    std::size_t n_trajectories = 10000;
    std::uint64_t base_seed = 1;
    std::string output_path;
    std::string pattern = "D1D3";
    std::string dump_path;
    std::string trajectory_log;
    std::string netlist_path;
    std::string transform_export;

    std::vector<DetectionPattern> patterns() const {
        if (pattern == "all") {
            auto all = heralding_patterns();
            return {all.begin(), all.end()};
        }
        DetectionPattern p = DetectionPattern::parse(pattern);
        if (!is_heralding(p)) throw ValidationError("pattern", "a heralding pair (D1D3, D2D4, D1D4, D2D3) or all");
        return {p};
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::optional<double> to_double(std::string_view s) {
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

/// "a", "bi", "a+bi", "a-bi", "i", "-i"; "j" works in place of "i". Spaces are
/// ignored.
inline std::optional<cplx> to_complex(std::string_view text) {
    std::string s;
    for (char c : text) {
        if (c != ' ' && c != '\t') s += c;
    }
    if (s.empty()) return std::nullopt;
    if (s.back() != 'i' && s.back() != 'j') {
        auto re = to_double(s);
        if (!re) return std::nullopt;
        return cplx(*re, 0.0);
    }
    s.pop_back();
    std::size_t split = std::string::npos;
    for (std::size_t k = s.size(); k-- > 1;) {
        if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    std::string re_part = split == std::string::npos ? "" : s.substr(0, split);
    std::string im_part = split == std::string::npos ? s : s.substr(split);
    if (im_part.empty() || im_part == "+") im_part = "1";
    if (im_part == "-") im_part = "-1";
    auto im = to_double(im_part);
    if (!im) return std::nullopt;
    double re = 0.0;
    if (!re_part.empty()) {
        auto r = to_double(re_part);
        if (!r) return std::nullopt;
        re = *r;
    }
    return cplx(re, *im);
}

}  // namespace detail

inline RunMode parse_mode(std::string_view s) {
    if (s == "gate") return RunMode::gate;
    if (s == "sweep") return RunMode::sweep;
    if (s == "mc") return RunMode::mc;
    if (s == "verify") return RunMode::verify;
    throw ArgumentError("unknown mode '" + std::string(s) + "'");
}

inline RunConfig parse_config(std::string_view text) {
    RunConfig cfg;
    std::string section;
    std::map<std::string, int> seen;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string_view::npos) continue;
        int col0 = static_cast<int>(first) + 1;
        std::string_view body = detail::trim(line);

        if (body.front() == '[') {
            if (body.back() != ']') throw ParseError("section header is missing ']'", line_no, col0);
            section = std::string(detail::trim(body.substr(1, body.size() - 2)));
            static const std::vector<std::string> known{"params", "inputs", "sweep", "mc", "optics"};
            if (std::find(known.begin(), known.end(), section) == known.end()) {
                throw ParseError("unknown section [" + section + "]", line_no, col0 + 1);
            }
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no, col0);
        std::string key(detail::trim(line.substr(0, eq)));
        std::string_view value = detail::trim(line.substr(eq + 1));
        auto vfirst = line.find_first_not_of(" \t", eq + 1);
        int vcol = vfirst == std::string_view::npos ? static_cast<int>(eq) + 2 : static_cast<int>(vfirst) + 1;
        if (key.empty()) throw ParseError("missing key before '='", line_no, col0);
        if (value.empty()) throw ParseError("missing value for '" + key + "'", line_no, vcol);

        std::string qualified = section.empty() ? key : section + "." + key;
        if (qualified != "sweep.axis") {
            if (seen.count(qualified)) {
                throw ParseError("duplicate key '" + key + "' (first set on line " + std::to_string(seen[qualified]) +
                                     ")",
                                 line_no, col0);
            }
            seen[qualified] = line_no;
        }

        auto number = [&]() {
            auto v = detail::to_double(value);
            if (!v) throw ParseError("'" + std::string(value) + "' is not a number", line_no, vcol);
            return *v;
        };
        auto integer = [&]() -> std::int64_t {
            std::int64_t v = 0;
            auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
            if (ec != std::errc() || ptr != value.data() + value.size()) {
                throw ParseError("'" + std::string(value) + "' is not an integer", line_no, vcol);
            }
            return v;
        };
        auto unknown = [&]() {
            std::string where = section.empty() ? "top level" : "[" + section + "]";
            return ParseError("unknown key '" + key + "' in " + where, line_no, col0);
        };

        if (section.empty()) {
            if (key == "mode") {
                try {
                    cfg.mode = parse_mode(value);
                } catch (const ArgumentError &e) {
                    throw ParseError(e.what(), line_no, vcol);
                }
            } else if (key == "output") {
                cfg.output_path = std::string(value);
            } else if (key == "pattern") {
                cfg.pattern = std::string(value);
            } else if (key == "dump") {
                cfg.dump_path = std::string(value);
            } else {
                throw unknown();
            }
        } else if (section == "params") {
            if (key == "fock_cutoff") {
                std::int64_t v = integer();
                if (v < 1 || v > 64) throw ValidationError("fock_cutoff", "fock_cutoff >= 1");
                cfg.params.fock_cutoff = static_cast<int>(v);
            } else if (std::find(sweepable_fields().begin(), sweepable_fields().end(), key) !=
                       sweepable_fields().end()) {
                set_param(cfg.params, key, number());
            } else {
                throw unknown();
            }
        } else if (section == "inputs") {
            if (key != "alpha1" && key != "beta1" && key != "alpha2" && key != "beta2") throw unknown();
            auto c = detail::to_complex(value);
            if (!c) throw ParseError("'" + std::string(value) + "' is not a complex number", line_no, vcol);
            if (key == "alpha1") cfg.inputs.alpha1 = *c;
            if (key == "beta1") cfg.inputs.beta1 = *c;
            if (key == "alpha2") cfg.inputs.alpha2 = *c;
            if (key == "beta2") cfg.inputs.beta2 = *c;
        } else if (section == "sweep") {
            if (key != "axis") throw unknown();
            std::istringstream fields{std::string(value)};
            std::vector<std::string> tok;
            for (std::string t; fields >> t;) tok.push_back(t);
            if (tok.size() != 4 && tok.size() != 5) {
                throw ParseError("axis needs: field start stop count [linear|log]", line_no, vcol);
            }
            SweepAxis axis;
            axis.field = tok[0];
            if (std::find(sweepable_fields().begin(), sweepable_fields().end(), axis.field) ==
                sweepable_fields().end()) {
                throw ValidationError("sweep axis field", "one of omega, kappa, tau, t_detect, phi1, phi2, eta, "
                                                          "fock_cutoff (got '" + axis.field + "')");
            }
            auto s = detail::to_double(tok[1]);
            auto e = detail::to_double(tok[2]);
            auto n = detail::to_double(tok[3]);
            if (!s || !e || !n) throw ParseError("axis start/stop/count must be numbers", line_no, vcol);
            if (*n < 1 || *n != std::floor(*n) || *n > 1e6) throw ValidationError("sweep count", "an integer >= 1");
            axis.start = *s;
            axis.stop = *e;
            axis.count = static_cast<int>(*n);
            if (tok.size() == 5) {
                if (tok[4] == "linear") {
                    axis.scale = AxisScale::linear;
                } else if (tok[4] == "log") {
                    axis.scale = AxisScale::log;
                } else {
                    throw ParseError("axis scale must be linear or log", line_no, vcol);
                }
            }
            if (axis.scale == AxisScale::log && !(axis.start > 0.0 && axis.stop > 0.0)) {
                throw ValidationError("log sweep of " + axis.field, "start > 0 and stop > 0");
            }
            for (const auto &other : cfg.sweep_axes) {
                if (other.field == axis.field) throw ParseError("axis '" + axis.field + "' given twice", line_no, vcol);
            }
            cfg.sweep_axes.push_back(axis);
        } else if (section == "mc") {
            if (key == "n_trajectories") {
                std::int64_t v = integer();
                if (v < 1) throw ValidationError("n_trajectories", "n_trajectories >= 1");
                cfg.n_trajectories = static_cast<std::size_t>(v);
            } else if (key == "base_seed") {
                std::uint64_t v = 0;
                auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
                if (ec != std::errc() || ptr != value.data() + value.size()) {
                    throw ParseError("'" + std::string(value) + "' is not an unsigned integer", line_no, vcol);
                }
                cfg.base_seed = v;
            } else if (key == "log") {
                cfg.trajectory_log = std::string(value);
            } else {
                throw unknown();
            }
        } else if (section == "optics") {
            if (key == "netlist") {
                cfg.netlist_path = std::string(value);
            } else if (key == "export") {
                cfg.transform_export = std::string(value);
            } else {
                throw unknown();
            }
        }
    }
    cfg.params.validate();
    cfg.inputs.validate();
    if (cfg.mode == RunMode::gate) cfg.patterns();
    for (const auto &axis : cfg.sweep_axes) {
        for (double v : axis.values()) {
            SystemParams p = cfg.params;
            set_param(p, axis.field, v);
            p.validate();
        }
    }
    return cfg;
}

inline RunConfig load_config(const std::string &path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

}  // namespace hcz
