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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hcz/amplitude_dump.hpp"
#include "hcz/config.hpp"
#include "hcz/errors.hpp"
#include "hcz/optics.hpp"
#include "hcz/parallel.hpp"
#include "hcz/protocol.hpp"
#include "hcz/trajectories.hpp"
#include "hcz/verification.hpp"
#include "json.hpp"

namespace hcz {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitNumeric = 2, kExitVerification = 3 };

struct RunOptions {
    unsigned jobs = 1;
    bool quiet = false;
    std::ostream *out = &std::cout;
    std::ostream *err = &std::cerr;
};

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Writes `content` to `path` through a temporary file and a rename, so
/// readers never see a partial file.
inline void write_file_atomic(const std::string &path, const std::string &content) {
    std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        f << content;
        f.flush();
        if (!f) throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot rename onto '" + path + "': " + ec.message());
    }
}

inline const char *kCsvHeader =
    "omega,kappa,tau,t_detect,phi1,phi2,eta,pattern,p_step1,p_herald,p_total,fidelity_cz\n";

inline std::string csv_row(const SystemParams &p, const GateOutcome &g) {
    std::string s;
    for (double v : {p.omega, p.kappa, p.tau, p.t_detect, p.phi1, p.phi2, p.eta}) s += format_double(v) + ",";
    s += g.pattern.str() + ",";
    s += format_double(g.p_step1) + "," + format_double(g.p_herald) + "," + format_double(g.p_total) + "," +
         format_double(g.fidelity_cz) + "\n";
    return s;
}

inline ModeTransform load_network(const RunConfig &cfg) {
    if (cfg.netlist_path.empty()) return paper_network();
    std::ifstream f(cfg.netlist_path);
    if (!f) throw std::runtime_error("cannot open netlist '" + cfg.netlist_path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return compose_network(parse_netlist(ss.str()));
}

/// Every parameter point of the sweep, last axis fastest.
inline std::vector<SystemParams> sweep_points(const RunConfig &cfg) {
    std::vector<SystemParams> points{cfg.params};
    for (const auto &axis : cfg.sweep_axes) {
        std::vector<SystemParams> next;
        for (const auto &p : points) {
            for (double v : axis.values()) {
                SystemParams q = p;
                set_param(q, axis.field, v);
                next.push_back(q);
            }
        }
        points = std::move(next);
    }
    return points;
}

namespace detail {

inline int run_gate(const RunConfig &cfg, const ModeTransform &net, const RunOptions &opt) {
    std::string csv = kCsvHeader;
    bool dumped = false;
    for (const auto &pattern : cfg.patterns()) {
        GateOutcome g = run_protocol(cfg.inputs, cfg.params, pattern, net);
        csv += csv_row(cfg.params, g);
        if (!opt.quiet) {
            *opt.out << "pattern " << g.pattern.str() << ": p_step1=" << format_double(g.p_step1)
                     << " p_herald=" << format_double(g.p_herald) << " p_total=" << format_double(g.p_total)
                     << " fidelity_cz=" << format_double(g.fidelity_cz) << "\n";
        }
        if (!cfg.dump_path.empty() && !dumped) {
            std::ostringstream dump;
            write_amplitude_dump(dump, g.corrected_state);
            write_file_atomic(cfg.dump_path, dump.str());
            dumped = true;
        }
    }
    if (!opt.quiet) *opt.out << "P_s (all four patterns, given step 1) = " << format_double(success_probability(cfg.params)) << "\n";
    if (!cfg.output_path.empty()) write_file_atomic(cfg.output_path, csv);
    return kExitOk;
}

inline int run_sweep(const RunConfig &cfg, const ModeTransform &net, const RunOptions &opt) {
    auto points = sweep_points(cfg);
    auto patterns = cfg.patterns();
    std::vector<std::string> rows(points.size());
    parallel_for(points.size(), opt.jobs, [&](std::size_t i) {
        std::string r;
        for (const auto &pattern : patterns) r += csv_row(points[i], run_protocol(cfg.inputs, points[i], pattern, net));
        rows[i] = std::move(r);
    });
    std::string csv = kCsvHeader;
    for (const auto &r : rows) csv += r;
    if (cfg.output_path.empty()) {
        *opt.out << csv;
    } else {
        write_file_atomic(cfg.output_path, csv);
        if (!opt.quiet) *opt.out << "wrote " << points.size() * patterns.size() << " rows to " << cfg.output_path << "\n";
    }
    return kExitOk;
}

inline int run_mc(const RunConfig &cfg, const ModeTransform &net, const RunOptions &opt) {
    const SystemParams &p = cfg.params;
    TrajectorySimulator sim(cfg.inputs, p, p.tau + p.t_detect, net);
    std::size_t n = cfg.n_trajectories;
    std::vector<std::uint8_t> outcome(n);
    std::vector<std::string> lines(cfg.trajectory_log.empty() ? 0 : n);
    parallel_for(n, opt.jobs, [&](std::size_t i) {
        TrajectoryRecord rec = sim.run(cfg.base_seed + i);
        outcome[i] = static_cast<std::uint8_t>(!rec.survived_step1 ? 0 : (rec.heralded_pattern ? 2 : 1));
        if (!lines.empty()) {
            std::ostringstream os;
            write_trajectory_log_line(os, rec, cfg.inputs);
            lines[i] = os.str();
        }
    });
    std::size_t survivors = 0;
    std::size_t hits = 0;
    for (auto o : outcome) {
        survivors += o > 0;
        hits += o == 2;
    }
    EstimateWithError herald = bernoulli_estimate(hits, survivors);
    EstimateWithError step = bernoulli_estimate(survivors, n);
    double expect = success_probability(p);
    double pstep = step1(cfg.inputs, p).p_suc;

    nlohmann::ordered_json summary;
    summary["n_trajectories"] = n;
    summary["base_seed"] = cfg.base_seed;
    summary["p_step1"] = {{"mean", step.mean}, {"stderr", step.std_error}, {"n_samples", step.n_samples},
                          {"closed_form", pstep}};
    summary["p_herald"] = {{"mean", herald.mean}, {"stderr", herald.std_error}, {"n_samples", herald.n_samples},
                           {"closed_form", expect}};
    if (!cfg.trajectory_log.empty()) {
        std::string log;
        for (const auto &l : lines) log += l;
        write_file_atomic(cfg.trajectory_log, log);
    }
    if (!cfg.output_path.empty()) write_file_atomic(cfg.output_path, summary.dump(2) + "\n");
    if (!opt.quiet) {
        *opt.out << "step 1 survival " << format_double(step.mean) << " +- " << format_double(step.std_error)
                 << " (closed form " << format_double(pstep) << ")\n"
                 << "heralding " << format_double(herald.mean) << " +- " << format_double(herald.std_error)
                 << " over " << herald.n_samples << " survivors (closed form " << format_double(expect) << ")\n";
    }
    return kExitOk;
}

inline int run_verify(const RunConfig &cfg, const RunOptions &opt) {
    verify::Options vo;
    vo.jobs = opt.jobs;
    vo.seed = cfg.base_seed;
    std::ostringstream report;
    auto results = verify::run_all(vo, opt.quiet ? nullptr : opt.out);
    bool ok = true;
    for (const auto &r : results) {
        report << verify::format_line(r);
        ok = ok && r.passed;
    }
    if (!cfg.output_path.empty()) write_file_atomic(cfg.output_path, report.str());
    return ok ? kExitOk : kExitVerification;
}

}  // namespace detail

/// Executes one configured run. Library errors are reported on opt.err and
/// mapped to exit codes: input problems 1, numeric trouble 2, failed
/// verification 3.
inline int run(const RunConfig &cfg, const RunOptions &opt = {}) {
    try {
        ModeTransform net = load_network(cfg);
        if (!cfg.transform_export.empty()) write_file_atomic(cfg.transform_export, transform_to_json(net).dump(2) + "\n");
        switch (cfg.mode) {
            case RunMode::gate:
                return detail::run_gate(cfg, net, opt);
            case RunMode::sweep:
                return detail::run_sweep(cfg, net, opt);
            case RunMode::mc:
                return detail::run_mc(cfg, net, opt);
            case RunMode::verify:
                return detail::run_verify(cfg, opt);
        }
    } catch (const NumericError &e) {
        *opt.err << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const ConsistencyError &e) {
        *opt.err << "consistency error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const CalibrationError &e) {
        *opt.err << "calibration error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception &e) {
        *opt.err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace hcz
