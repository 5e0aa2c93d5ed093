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

// The acceptance suite. Each check compares library output against an oracle
// written here from scratch (2x2 Cayley-Hamilton exponentials, hand-expanded
// coefficient patterns, the hardcoded detector matrix) rather than against
// another library routine.

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "hcz/dynamics.hpp"
#include "hcz/hilbert.hpp"
#include "hcz/optics.hpp"
#include "hcz/protocol.hpp"
#include "hcz/trajectories.hpp"

namespace hcz::verify {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct Options {
    unsigned jobs = 1;
    std::uint64_t seed = 20260101;
};

inline std::string fmt(const char *format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

/// exp(A) for a 2x2 complex matrix by Cayley-Hamilton:
/// exp(A) = e^mu [cosh(d) I + sinh(d)/d (A - mu I)], mu = tr A / 2, d^2 = -det(A - mu I).
inline Eigen::Matrix2cd expm2(const Eigen::Matrix2cd &a) {
    cplx mu = a.trace() / 2.0;
    Eigen::Matrix2cd n = a - mu * Eigen::Matrix2cd::Identity();
    cplx d2 = -n.determinant();
    cplx d = std::sqrt(d2);
    cplx ch;
    cplx sh_over_d;
    if (std::abs(d) < 1e-6) {
        ch = 1.0 + d2 / 2.0 + d2 * d2 / 24.0;
        sh_over_d = 1.0 + d2 / 6.0 + d2 * d2 / 120.0;
    } else {
        ch = std::cosh(d);
        sh_over_d = std::sinh(d) / d;
    }
    return std::exp(mu) * (ch * Eigen::Matrix2cd::Identity() + sh_over_d * n);
}

/// Unnormalized (|g,0>, |s,1>) amplitudes after no-jump evolution from |g,0>.
inline Eigen::Vector2cd two_level_no_jump(double omega, double kappa, double tau) {
    Eigen::Matrix2cd g;
    g << 0.0, omega, omega, cplx(0.0, -kappa);
    return expm2(g * (-kI * tau)).col(0);
}

/// Detector rows written out by hand, columns (a1H, a1V, a2H, a2V).
inline Eigen::Matrix4cd reference_detector_matrix() {
    const double h = 0.5;
    const double r = 1.0 / std::sqrt(2.0);
    Eigen::Matrix4cd b;
    b << h, h, 0, r,
         h, h, 0, -r,
         h, -h, r, 0,
         -h, h, r, 0;
    return b;
}

/// sum over (l1, l2) in {H, V}^2 of sign * c1(l1) c2(l2) |x l1, x l2>, x = s or g.
inline StateVector signed_pair_state(const AtomInputs &in, std::array<int, 4> signs, bool s_levels) {
    SpaceDescriptor s = atom_space(2);
    Vector v = Vector::Zero(16);
    Level h = s_levels ? Level::sH : Level::gH;
    Level vv = s_levels ? Level::sV : Level::gV;
    auto at = [&](Level l1, Level l2) { return static_cast<Eigen::Index>(s.index_of(BasisLabel{{l1, l2}, {}})); };
    // order: HH, VH, HV, VV (atom 1 first)
    v[at(h, h)] = double(signs[0]) * in.alpha1 * in.alpha2;
    v[at(vv, h)] = double(signs[1]) * in.beta1 * in.alpha2;
    v[at(h, vv)] = double(signs[2]) * in.alpha1 * in.beta2;
    v[at(vv, vv)] = double(signs[3]) * in.beta1 * in.beta2;
    return StateVector(s, std::move(v));
}

inline AtomInputs random_inputs(std::mt19937_64 &rng) {
    std::normal_distribution<double> n;
    auto qubit = [&](cplx &a, cplx &b) {
        a = cplx(n(rng), n(rng));
        b = cplx(n(rng), n(rng));
        double s = std::sqrt(std::norm(a) + std::norm(b));
        a /= s;
        b /= s;
    };
    AtomInputs in;
    qubit(in.alpha1, in.beta1);
    qubit(in.alpha2, in.beta2);
    return in;
}

inline double max_abs_diff(const StateVector &a, const StateVector &b) {
    return (a.amplitudes() - b.amplitudes()).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------

inline CriterionResult criterion1() {
    CriterionResult r{1, "closed-form no-jump coefficients and survival vs numeric evolution", false, "", 0.0};
    const double kappa = 0.2;
    double worst_coeff = 0.0;
    double worst_prob = 0.0;
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n;
    SpaceDescriptor single(1, 2, 1);
    for (double w : {0.3, 0.5, 1.0, 2.0, 5.0}) {
        for (double t : {0.1, 0.7, 1.3, 3.0}) {
            double omega = w * kappa;
            double tau = t / kappa;
            Eigen::Vector2cd raw = two_level_no_jump(omega, kappa, tau);
            double norm = raw.norm();
            cplx a_ref = raw[0] / norm;
            cplx b_ref = kI * raw[1] / norm;  // state is a|g,0> - i b|s,1>
            auto c = closed_form_coefficients(omega, kappa, tau);
            worst_coeff = std::max({worst_coeff, std::abs(c.a - a_ref), std::abs(c.b - b_ref)});

            cplx al(n(rng), n(rng));
            cplx be(n(rng), n(rng));
            double s = std::sqrt(std::norm(al) + std::norm(be));
            Vector v = Vector::Zero(16);
            v[static_cast<Eigen::Index>(single.index_of(BasisLabel{{Level::gH}, {0, 0}}))] = al / s;
            v[static_cast<Eigen::Index>(single.index_of(BasisLabel{{Level::gV}, {0, 0}}))] = be / s;
            StateVector psi(single, v);
            StateVector out = evolve_no_jump(psi, no_jump_generator(single, omega, kappa, 1), tau, 1);
            double p = p_no_emission(omega, kappa, tau);
            worst_prob = std::max({worst_prob, std::abs(p - out.norm2()), std::abs(p - norm * norm)});
        }
    }
    r.passed = worst_coeff < 1e-10 && worst_prob < 1e-10;
    r.detail = "max|d(a,b)|=" + fmt("%.2e", worst_coeff) + " max|dP|=" + fmt("%.2e", worst_prob);
    return r;
}

inline CriterionResult criterion2() {
    CriterionResult r{2, "detector network unitarity and calibrated netlist", false, "", 0.0};
    ModeTransform paper = paper_network();
    Eigen::Matrix4cd ref = reference_detector_matrix();
    double unitarity = (paper.matrix * paper.matrix.adjoint() - Eigen::Matrix4cd::Identity()).cwiseAbs().maxCoeff();
    double vs_ref = (paper.matrix - ref).cwiseAbs().maxCoeff();
    ModeTransform composed = calibrated_network();
    double vs_netlist = (composed.matrix - ref).cwiseAbs().maxCoeff();
    r.passed = unitarity < 1e-12 && vs_ref < 1e-12 && vs_netlist < 1e-12;
    r.detail = "|BB^dag-I|=" + fmt("%.2e", unitarity) + " |paper-ref|=" + fmt("%.2e", vs_ref) +
               " |netlist-ref|=" + fmt("%.2e", vs_netlist);
    return r;
}

/// Reported quantities of criteria 3-5, compared across Fock cutoffs.
struct Report {
    std::vector<double> values;
    std::vector<Vector> states;
};

inline CriterionResult criterion3(const SystemParams &params, Report *report = nullptr) {
    CriterionResult r{3, "heralded states for 100 random inputs", false, "", 0.0};
    std::mt19937_64 rng(3);
    double worst_fid = 0.0;
    double worst_partner = 0.0;
    for (int k = 0; k < 100; ++k) {
        AtomInputs in = random_inputs(rng);
        Step1Result s1 = step1(in, params);
        auto a = detect_coincidence(s1.state, DetectionPattern{1, 3}, params);
        auto a2 = detect_coincidence(s1.state, DetectionPattern{2, 4}, params);
        auto b = detect_coincidence(s1.state, DetectionPattern{1, 4}, params);
        auto b2 = detect_coincidence(s1.state, DetectionPattern{2, 3}, params);
        double fa = fidelity(a.state, signed_pair_state(in, {1, 1, 1, -1}, true));
        double fb = fidelity(b.state, signed_pair_state(in, {1, 1, -1, 1}, true));
        worst_fid = std::max({worst_fid, 1.0 - fa, 1.0 - fb});
        worst_partner = std::max({worst_partner, max_abs_diff(a.state, a2.state), max_abs_diff(b.state, b2.state)});
        if (report) {
            for (const auto *h : {&a, &a2, &b, &b2}) {
                report->states.push_back(h->state.amplitudes());
                report->values.push_back(h->probability);
            }
        }
    }
    r.passed = worst_fid <= 1e-10 && worst_partner <= 1e-12;
    r.detail = "max(1-F)=" + fmt("%.2e", worst_fid) + " max|partner diff|=" + fmt("%.2e", worst_partner);
    return r;
}

inline CriterionResult criterion4(const SystemParams &params, Report *report = nullptr) {
    CriterionResult r{4, "controlled-phase truth table for every heralding pattern", false, "", 0.0};
    const double s = 1.0 / std::sqrt(2.0);
    std::vector<AtomInputs> cases{{1, 0, 1, 0}, {0, 1, 1, 0}, {1, 0, 0, 1}, {0, 1, 0, 1}, {s, s, s, s}};
    double worst = 0.0;
    double worst_sign = 0.0;
    for (const auto &in : cases) {
        // |gV gV> picks up the sign; on the superposition input that sign
        // is a relative phase and shows up in the fidelity.
        StateVector table = signed_pair_state(in, {1, 1, 1, -1}, false);
        for (const auto &p : heralding_patterns()) {
            GateOutcome g = run_protocol(in, params, p);
            worst = std::max(worst, 1.0 - g.fidelity_cz);
            worst_sign = std::max(worst_sign, 1.0 - fidelity(g.corrected_state, table));
            if (report) {
                report->values.push_back(g.fidelity_cz);
                report->states.push_back(g.corrected_state.amplitudes());
            }
        }
    }
    r.passed = worst <= 1e-9 && worst_sign <= 1e-9;
    r.detail = "max(1-F_cz)=" + fmt("%.2e", worst) + " max(1-F_table)=" + fmt("%.2e", worst_sign);
    return r;
}

inline SystemParams herald_params(int fock_cutoff = 1) {
    SystemParams p;
    p.omega = 1.0;
    p.kappa = 0.2;
    p.tau = 1.3;
    p.t_detect = 5.0 / p.kappa;
    p.fock_cutoff = fock_cutoff;
    return p;
}

inline CriterionResult criterion5(const SystemParams &params, const Options &opt, Report *report = nullptr) {
    CriterionResult r{5, "heralding probability: closed form, operator route and Monte Carlo", false, "", 0.0};
    Eigen::Vector2cd raw = two_level_no_jump(params.omega, params.kappa, params.tau);
    double b2 = std::norm(raw[1]) / raw.squaredNorm();
    double window = 1.0 - std::exp(-2.0 * params.kappa * params.t_detect);
    double per_pattern = b2 * b2 * window * window / 8.0;

    std::mt19937_64 rng(5);
    double worst_rel = 0.0;
    double worst_total = 0.0;
    std::vector<AtomInputs> inputs{AtomInputs::uniform(), {1, 0, 1, 0}};
    for (int k = 0; k < 8; ++k) inputs.push_back(random_inputs(rng));
    for (const auto &in : inputs) {
        Step1Result s1 = step1(in, params);
        double sum = 0.0;
        for (const auto &p : heralding_patterns()) {
            double q = detect_coincidence(s1.state, p, params).probability;
            worst_rel = std::max(worst_rel, std::abs(q - per_pattern) / per_pattern);
            sum += q;
            if (report) report->values.push_back(q);
        }
        worst_total = std::max(worst_total, std::abs(sum - 4.0 * per_pattern));
    }
    double ps = success_probability(params);
    double ps_ref = b2 * b2 * window * window / 2.0;
    double rel_total = std::max(worst_total, std::abs(ps - ps_ref)) / ps_ref;

    auto est = estimate_heralding(AtomInputs::uniform(), params, 100000, opt.seed, opt.jobs);
    double z = std::abs(est.mean - ps_ref) / est.std_error;
    if (report) {
        report->values.push_back(ps);
        report->values.push_back(est.mean);
        report->values.push_back(est.std_error);
    }
    r.passed = worst_rel < 1e-8 && rel_total < 1e-8 && z <= 3.0;
    r.detail = "max rel(per pattern)=" + fmt("%.2e", worst_rel) + " rel(P_s)=" + fmt("%.2e", rel_total) +
               " MC=" + fmt("%.5f", est.mean) + "+-" + fmt("%.5f", est.std_error) + " vs " + fmt("%.5f", ps_ref) +
               " (" + fmt("%.2f", z) + " sigma)";
    return r;
}

inline CriterionResult criterion6() {
    CriterionResult r{6, "fidelity independent of path phases on an 8x8 grid", false, "", 0.0};
    std::mt19937_64 rng(6);
    std::vector<AtomInputs> inputs{AtomInputs::uniform(), random_inputs(rng)};
    double spread = 0.0;
    for (const auto &in : inputs) {
        for (const auto &p : heralding_patterns()) {
            double lo = 2.0;
            double hi = -1.0;
            for (int i = 0; i < 8; ++i) {
                for (int j = 0; j < 8; ++j) {
                    SystemParams params = herald_params();
                    params.phi1 = 2.0 * std::numbers::pi * i / 8.0;
                    params.phi2 = 2.0 * std::numbers::pi * j / 8.0;
                    double f = run_protocol(in, params, p).fidelity_cz;
                    lo = std::min(lo, f);
                    hi = std::max(hi, f);
                }
            }
            spread = std::max(spread, hi - lo);
        }
    }
    r.passed = spread < 1e-10;
    r.detail = "max fidelity spread=" + fmt("%.2e", spread);
    return r;
}

inline CriterionResult criterion7(const Options &opt) {
    CriterionResult r{7, "photon loss scales heralding by (1-eta)^2, fidelity unchanged", false, "", 0.0};
    const std::size_t n = 40000;
    AtomInputs in = AtomInputs::uniform();
    double f0 = run_protocol(in, herald_params(), DetectionPattern{1, 3}).fidelity_cz;
    double fid_shift = 0.0;
    double worst_z = 0.0;
    std::string detail;
    SystemParams base = herald_params();
    double ps0 = success_probability(base);
    for (double eta : {0.0, 0.3, 0.7}) {
        SystemParams p = base;
        p.eta = eta;
        for (const auto &pat : heralding_patterns()) {
            fid_shift = std::max(fid_shift, std::abs(run_protocol(in, p, pat).fidelity_cz - f0));
        }
        double expect = (1.0 - eta) * (1.0 - eta) * ps0;
        auto est = estimate_heralding(in, p, n, opt.seed + 1000003, opt.jobs);
        double z = est.std_error > 0 ? std::abs(est.mean - expect) / est.std_error
                                     : (est.mean == expect ? 0.0 : 1e9);
        worst_z = std::max(worst_z, z);
        detail += " eta=" + fmt("%.1f", eta) + ":" + fmt("%.4f", est.mean) + "/" + fmt("%.4f", expect);
    }
    r.passed = fid_shift < 1e-10 && worst_z <= 3.0;
    r.detail = "max|dF|=" + fmt("%.2e", fid_shift) + " max z=" + fmt("%.2f", worst_z) + detail;
    return r;
}

/// Regime for the unraveling check: weak damping and a near-complete Rabi
/// transfer, so both horizons have a low-rank state and the n = 10^4
/// sampling error sits well below the tolerance.
inline SystemParams unraveling_params() {
    SystemParams p;
    p.omega = 1.0;
    p.kappa = 0.05;
    p.tau = 1.5;
    p.t_detect = 100.0;
    return p;
}

inline CriterionResult criterion8(const Options &opt) {
    CriterionResult r{8, "trajectory average vs Lindblad master equation", false, "", 0.0};
    SystemParams p = unraveling_params();
    AtomInputs in{1, 0, 1, 0};
    StateVector psi0 = prepare_inputs(in, joint_space(p));
    double worst = 0.0;
    std::string detail;
    for (double horizon : {p.tau / 2.0, p.tau + p.t_detect}) {
        DensityMatrix ref = lindblad_oracle(psi0, p, horizon, 4000);
        DensityMatrix avg = unconditional_average(in, p, 10000, horizon, opt.seed + 2000003, opt.jobs);
        double d = trace_distance(avg, ref);
        worst = std::max(worst, d);
        detail += " t=" + fmt("%.2f", horizon) + ":" + fmt("%.2e", d);
    }
    r.passed = worst < 5e-3;
    r.detail = "trace distance" + detail;
    return r;
}

inline CriterionResult criterion9(const Options &opt) {
    CriterionResult r{9, "Fock cutoff 2 reproduces criteria 3-5", false, "", 0.0};
    SystemParams p1 = herald_params(1);
    SystemParams p2 = herald_params(2);
    Report a;
    Report b;
    bool ok1 = criterion3(p1, &a).passed && criterion4(p1, &a).passed && criterion5(p1, opt, &a).passed;
    bool ok2 = criterion3(p2, &b).passed && criterion4(p2, &b).passed && criterion5(p2, opt, &b).passed;
    double diff = 0.0;
    bool shape = a.values.size() == b.values.size() && a.states.size() == b.states.size();
    if (shape) {
        for (std::size_t k = 0; k < a.values.size(); ++k) diff = std::max(diff, std::abs(a.values[k] - b.values[k]));
        for (std::size_t k = 0; k < a.states.size(); ++k) {
            diff = std::max(diff, (a.states[k] - b.states[k]).cwiseAbs().maxCoeff());
        }
    }
    r.passed = ok1 && ok2 && shape && diff <= 1e-10;
    r.detail = "max change=" + fmt("%.2e", diff) + (ok2 ? "" : " (criteria fail at cutoff 2)");
    return r;
}

inline std::string format_line(const CriterionResult &r) {
    char head[64];
    std::snprintf(head, sizeof head, "[%s] criterion %d: ", r.passed ? "PASS" : "FAIL", r.id);
    return std::string(head) + r.name + " | " + r.detail + " | " + fmt("%.2f", r.seconds) + " s\n";
}

/// Wall-clock budget in seconds, 0 when unlimited.
inline double time_limit(int id) {
    switch (id) {
        case 1:
            return 1.0;
        case 5:
            return 60.0;
        case 8:
            return 120.0;
        default:
            return 0.0;
    }
}

/// Runs all criteria in order; `progress` gets one line per criterion.
inline std::vector<CriterionResult> run_all(const Options &opt, std::ostream *progress = nullptr) {
    std::vector<std::function<CriterionResult()>> checks{
        [] { return criterion1(); },
        [] { return criterion2(); },
        [] { return criterion3(herald_params()); },
        [] { return criterion4(herald_params()); },
        [&] { return criterion5(herald_params(), opt); },
        [] { return criterion6(); },
        [&] { return criterion7(opt); },
        [&] { return criterion8(opt); },
        [&] { return criterion9(opt); },
    };
    std::vector<CriterionResult> out;
    for (std::size_t k = 0; k < checks.size(); ++k) {
        auto t0 = std::chrono::steady_clock::now();
        CriterionResult res;
        try {
            res = checks[k]();
        } catch (const std::exception &e) {
            res.id = static_cast<int>(k + 1);
            res.name = "criterion " + std::to_string(k + 1);
            res.passed = false;
            res.detail = std::string("exception: ") + e.what();
        }
        res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        double limit = time_limit(res.id);
        if (limit > 0.0 && res.seconds > limit) {
            res.passed = false;
            res.detail += " (over the " + fmt("%.0f", limit) + " s budget)";
        }
        if (progress) *progress << format_line(res) << std::flush;
        out.push_back(res);
    }
    return out;
}


}  // namespace hcz::verify
