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

// Atom-cavity dynamics.
//
// Rate convention: the no-jump generator is H - i*kappa*sum(a^dag a), so a
// photon amplitude decays as exp(-kappa t) and its intensity as
// exp(-2 kappa t). In master-equation form every mode therefore has jump
// rate 2*kappa, i.e. jump operators sqrt(2 kappa) * a. Both the Lindblad
// oracle and the trajectory sampler use this convention.

#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "hcz/errors.hpp"
#include "hcz/hilbert.hpp"
#include "hcz/matrix_exp.hpp"
#include "hcz/optics.hpp"

namespace hcz {

struct SystemParams {
    double omega = 1.0;
    double kappa = 0.2;
    double tau = 1.3;
    double t_detect = 25.0;
    double phi1 = 0.0;
    double phi2 = 0.0;
    double eta = 0.0;
    int fock_cutoff = 1;

    void validate() const {
        if (!(omega > 0.0) || !std::isfinite(omega)) throw ValidationError("omega", "omega > 0");
        if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ValidationError("kappa", "kappa >= 0");
        if (!(tau >= 0.0) || !std::isfinite(tau)) throw ValidationError("tau", "tau >= 0");
        if (!(t_detect >= 0.0) || !std::isfinite(t_detect)) throw ValidationError("t_detect", "t_detect >= 0");
        if (!std::isfinite(phi1)) throw ValidationError("phi1", "finite");
        if (!std::isfinite(phi2)) throw ValidationError("phi2", "finite");
        if (!(eta >= 0.0 && eta <= 1.0)) throw ValidationError("eta", "[0,1]");
        if (fock_cutoff < 1) throw ValidationError("fock_cutoff", "fock_cutoff >= 1");
    }
};

struct NoJumpCoefficients {
    cplx a;
    cplx b;
    cplx omega_kappa;
};

namespace detail {

struct RawCoefficients {
    // Unnormalized ground/photon amplitudes scaled by exp(-log_scale).
    cplx ground;
    cplx photon;
    double log_scale;
    cplx omega_kappa;
};

// Solves c'' + kappa c' + omega^2 c = 0 with c(0)=1, c'(0)=0 for the ground
// amplitude (without the exp(-kappa tau / 2) envelope):
//   ground = cos(W tau) + kappa/(2W) sin(W tau),  photon = omega/W sin(W tau)
// with W = sqrt(omega^2 - kappa^2/4) complex. cos/sin are carried with a
// common factor exp(-|Im W tau|) so the overdamped branch cannot overflow.
inline RawCoefficients raw_coefficients(double omega, double kappa, double tau) {
    if (!(omega > 0.0)) throw ArgumentError("omega must be > 0");
    if (!(kappa >= 0.0)) throw ArgumentError("kappa must be >= 0");
    if (!(tau >= 0.0)) throw ArgumentError("tau must be >= 0");
    cplx w = std::sqrt(cplx(omega * omega - kappa * kappa / 4.0, 0.0));
    cplx x = w * tau;
    double s = std::abs(x.imag());
    cplx cos_x;
    cplx sin_over_w;  // sin(W tau) / W
    if (std::abs(x) < 1e-6) {
        // Critical-damping guard band: series limit sin(x)/W -> tau.
        cplx x2 = x * x;
        cos_x = (1.0 - x2 / 2.0 + x2 * x2 / 24.0) * std::exp(-s);
        sin_over_w = tau * (1.0 - x2 / 6.0 + x2 * x2 / 120.0) * std::exp(-s);
    } else {
        cplx ep = std::exp(kI * x - s);
        cplx em = std::exp(-kI * x - s);
        cos_x = (ep + em) / 2.0;
        sin_over_w = (ep - em) / (2.0 * kI) / w;
    }
    return RawCoefficients{cos_x + (kappa / 2.0) * sin_over_w, omega * sin_over_w, s, w};
}

}  // namespace detail

/// Normalized no-jump coefficients (a, b) after driving for tau.
inline NoJumpCoefficients closed_form_coefficients(double omega, double kappa, double tau) {
    auto raw = detail::raw_coefficients(omega, kappa, tau);
    double n = std::sqrt(std::norm(raw.ground) + std::norm(raw.photon));
    return NoJumpCoefficients{raw.ground / n, raw.photon / n, raw.omega_kappa};
}

/// Probability that a single driven cavity emits no photon during tau.
inline double p_no_emission(double omega, double kappa, double tau) {
    auto raw = detail::raw_coefficients(omega, kappa, tau);
    double bracket = std::norm(raw.ground) + std::norm(raw.photon);
    return std::exp(-kappa * tau + 2.0 * raw.log_scale) * bracket;
}

/// H_j = Omega (a_H |gH><sH| + h.c. + a_V |gV><sV| + h.c.) for one atom and
/// its own cavity.
inline LinearOperator effective_hamiltonian(const SpaceDescriptor &space, double omega, int atom) {
    if (!space.has_modes()) throw ArgumentError("effective_hamiltonian needs cavity modes in the space");
    auto aH = mode_annihilator(space, space.mode_of(atom, 0));
    auto aV = mode_annihilator(space, space.mode_of(atom, 1));
    auto g_from_sH = atom_transition(space, atom, Level::sH, Level::gH);
    auto g_from_sV = atom_transition(space, atom, Level::sV, Level::gV);
    LinearOperator down = aH * g_from_sH + aV * g_from_sV;
    return (down + down.adjoint()) * cplx(omega, 0.0);
}

/// -i kappa (a_H^dag a_H + a_V^dag a_V) for the given cavity.
inline LinearOperator cavity_damping(const SpaceDescriptor &space, double kappa, int cavity) {
    auto n = number_operator(space, space.mode_of(cavity, 0)) + number_operator(space, space.mode_of(cavity, 1));
    return n * cplx(0.0, -kappa);
}

/// H'_j = H_j - i kappa n_j.
inline LinearOperator no_jump_generator(const SpaceDescriptor &space, double omega, double kappa, int atom) {
    return effective_hamiltonian(space, omega, atom) + cavity_damping(space, kappa, atom);
}

/// Both driven systems at once: H'_1 (+ H'_2 on the joint space).
inline LinearOperator drive_generator(const SpaceDescriptor &space, double omega, double kappa) {
    LinearOperator g = no_jump_generator(space, omega, kappa, 1);
    for (int atom = 2; atom <= space.n_atoms(); ++atom) g = g + no_jump_generator(space, omega, kappa, atom);
    return g;
}

/// Drives off: -i kappa sum over all modes of a^dag a.
inline LinearOperator decay_generator(const SpaceDescriptor &space, double kappa) {
    return total_number_operator(space) * cplx(0.0, -kappa);
}

/// exp(-i G duration) state, unnormalized. Dense spaces (<= 300) use the
/// matrix exponential of one step raised to `steps`; larger spaces use the
/// Taylor stepwise integrator with `steps` steps.
inline StateVector evolve_no_jump(const StateVector &state, const LinearOperator &generator, double duration,
                                  int steps) {
    if (steps < 1) throw ArgumentError("steps must be >= 1");
    if (!(state.space() == generator.space())) throw ArgumentError("state and generator live on different spaces");
    if (!state.all_finite()) throw NumericError("non-finite amplitudes in initial state");
    if (duration == 0.0) return state;
    double dt = duration / steps;
    Vector v = state.amplitudes();
    if (static_cast<Eigen::Index>(state.space().dimension()) <= kMaxDenseExpDimension) {
        DenseMatrix u = expm(generator.dense() * (-kI * dt));
        for (int k = 0; k < steps; ++k) v = u * v;
    } else {
        for (int k = 0; k < steps; ++k) v = taylor_propagate(generator.matrix(), std::move(v), dt);
    }
    if (!v.allFinite()) throw NumericError("no-jump evolution produced non-finite amplitudes");
    return StateVector(state.space(), std::move(v));
}

/// alpha[a|gH,0,0> - i b|sH,1,0>] + beta[a|gV,0,0> - i b|sV,0,1>].
inline StateVector single_system_state(cplx alpha, cplx beta, const NoJumpCoefficients &coeffs,
                                       const SpaceDescriptor &space) {
    if (space.n_atoms() != 1 || space.n_modes() != 2) {
        throw ArgumentError("single_system_state needs a one-atom, two-mode space");
    }
    if (std::abs(std::norm(alpha) + std::norm(beta) - 1.0) > 1e-9) {
        throw ArgumentError("atomic amplitudes must satisfy |alpha|^2 + |beta|^2 = 1");
    }
    Vector v = Vector::Zero(static_cast<Eigen::Index>(space.dimension()));
    auto at = [&](Level l, int nH, int nV) {
        return static_cast<Eigen::Index>(space.index_of(BasisLabel{{l}, {nH, nV}}));
    };
    v[at(Level::gH, 0, 0)] = alpha * coeffs.a;
    v[at(Level::sH, 1, 0)] = -kI * alpha * coeffs.b;
    v[at(Level::gV, 0, 0)] = beta * coeffs.a;
    v[at(Level::sV, 0, 1)] = -kI * beta * coeffs.b;
    return StateVector(space, std::move(v)).normalized();
}

/// Step-2 free decay for time t: every photon of cavity j picks up
/// exp(-kappa t) exp(-i phi_j). Renormalized.
inline StateVector decay_propagate(const StateVector &state, double kappa, double t, std::pair<double, double> phases) {
    const auto &s = state.space();
    if (!s.has_modes()) throw ArgumentError("decay_propagate needs cavity modes");
    Vector v = state.amplitudes();
    std::array<double, 2> phi{phases.first, phases.second};
    for (std::size_t i = 0; i < s.dimension(); ++i) {
        cplx f = 1.0;
        for (int c = 1; c <= s.n_atoms(); ++c) {
            int n = s.cavity_photons(i, c);
            if (n) f *= std::exp(cplx(-kappa * t * n, -phi[static_cast<std::size_t>(c - 1)] * n));
        }
        v[static_cast<Eigen::Index>(i)] *= f;
    }
    return StateVector(s, std::move(v)).normalized();
}

/// Phase rotation exp(-i n_j phi_j) per cavity as an operator (unitary).
inline LinearOperator path_phase_operator(const SpaceDescriptor &space, std::pair<double, double> phases) {
    std::array<double, 2> phi{phases.first, phases.second};
    std::vector<Eigen::Triplet<cplx>> t;
    for (std::size_t i = 0; i < space.dimension(); ++i) {
        cplx f = 1.0;
        for (int c = 1; c <= space.n_atoms(); ++c) {
            f *= std::exp(cplx(0.0, -phi[static_cast<std::size_t>(c - 1)] * space.cavity_photons(i, c)));
        }
        t.emplace_back(static_cast<int>(i), static_cast<int>(i), f);
    }
    auto d = static_cast<Eigen::Index>(space.dimension());
    SparseMatrix m(d, d);
    m.setFromTriplets(t.begin(), t.end());
    return LinearOperator(space, std::move(m));
}

class DensityMatrix {
   public:
    DensityMatrix(SpaceDescriptor space, DenseMatrix rho) : space_(space), rho_(std::move(rho)) {
        auto d = static_cast<Eigen::Index>(space_.dimension());
        if (rho_.rows() != d || rho_.cols() != d) throw ArgumentError("density matrix shape mismatch");
    }

    static DensityMatrix pure(const StateVector &psi) {
        const Vector &v = psi.amplitudes();
        return DensityMatrix(psi.space(), v * v.adjoint());
    }

    const SpaceDescriptor &space() const { return space_; }
    const DenseMatrix &matrix() const { return rho_; }
    double trace() const { return rho_.trace().real(); }
    double purity() const { return (rho_ * rho_).trace().real(); }

   private:
    SpaceDescriptor space_;
    DenseMatrix rho_;
};

/// 1/2 sum |eig(rho - sigma)|.
inline double trace_distance(const DensityMatrix &rho, const DensityMatrix &sigma) {
    if (!(rho.space() == sigma.space())) throw ArgumentError("density matrices live on different spaces");
    DenseMatrix diff = rho.matrix() - sigma.matrix();
    DenseMatrix herm = (diff + diff.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(herm, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

/// Master-equation dynamics for the two protocol stages: drives on for
/// t < tau, off afterwards, jump operators supplied by the caller.
struct MasterEquation {
    LinearOperator drive;
    LinearOperator decay;
    std::vector<LinearOperator> jumps;  // already scaled by sqrt(2 kappa)
    double tau;
};

/// Integrates d rho/dt = -i[H, rho] + sum_j (L rho L^dag - 1/2 {L^dag L, rho})
/// from rho = |initial><initial| to `horizon` with RK4 on the subspace the
/// dynamics can reach. Written as -i(G rho - rho G^dag) + sum L rho L^dag with
/// G the no-jump generator, which is the same equation.
inline DensityMatrix integrate_master_equation(const StateVector &initial, const MasterEquation &eq, double horizon,
                                               int steps) {
    if (steps < 1) throw ArgumentError("steps must be >= 1");
    if (!(horizon >= 0.0)) throw ArgumentError("horizon must be >= 0");
    const auto &space = initial.space();
    std::vector<const LinearOperator *> ops{&eq.drive, &eq.decay};
    for (const auto &l : eq.jumps) ops.push_back(&l);
    Subspace sub = Subspace::reachable(space, Subspace::support(initial), ops);
    SparseMatrix g_drive = sub.restrict(eq.drive);
    SparseMatrix g_decay = sub.restrict(eq.decay);
    std::vector<SparseMatrix> ls;
    std::vector<SparseMatrix> ls_adj;
    for (const auto &l : eq.jumps) {
        ls.push_back(sub.restrict(l));
        ls_adj.push_back(SparseMatrix(ls.back().adjoint()));
    }
    Vector psi = sub.restrict(initial);
    DenseMatrix rho = psi * psi.adjoint();

    auto rhs = [&](const SparseMatrix &g, const DenseMatrix &r) {
        DenseMatrix gr = g * r;
        DenseMatrix out = -kI * (gr - gr.adjoint());
        for (std::size_t j = 0; j < ls.size(); ++j) {
            DenseMatrix lr = ls[j] * r;
            out += (ls[j] * lr.adjoint()).adjoint();
        }
        return out;
    };
    auto integrate = [&](const SparseMatrix &g, double duration, int n) {
        if (duration <= 0.0 || n <= 0) return;
        double h = duration / n;
        for (int k = 0; k < n; ++k) {
            DenseMatrix k1 = rhs(g, rho);
            DenseMatrix k2 = rhs(g, rho + (h / 2.0) * k1);
            DenseMatrix k3 = rhs(g, rho + (h / 2.0) * k2);
            DenseMatrix k4 = rhs(g, rho + h * k3);
            rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    };

    double t1 = std::min(eq.tau, horizon);
    double t2 = horizon - t1;
    int n1 = horizon > 0.0 ? static_cast<int>(std::ceil(steps * t1 / horizon)) : 0;
    int n2 = t2 > 0.0 ? std::max(1, steps - n1) : 0;
    integrate(g_drive, t1, n1);
    integrate(g_decay, t2, n2);

    // RK4 conserves the trace exactly, so an unstable step shows up as
    // entries outside the unit disk instead
    double tr = rho.trace().real();
    double peak = rho.allFinite() ? rho.cwiseAbs().maxCoeff() : std::numeric_limits<double>::infinity();
    if (!(peak <= 1.0 + 1e-8) || std::abs(tr - 1.0) > 1e-8) {
        throw NumericError("master equation integration diverged (trace " + std::to_string(tr) + ", peak entry " +
                           std::to_string(peak) + ") with " + std::to_string(steps) + " steps; try at least " +
                           std::to_string(4 * steps) + " steps");
    }
    return DensityMatrix(space, sub.embed(rho));
}

/// Lindblad reference for the protocol: drives on for t < tau, free decay
/// after, rate 2*kappa per mode. On the joint space the jump operators are the
/// detector modes (with path phases); on a single system they are the two
/// cavity annihilators. Returns rho(horizon).
inline DensityMatrix lindblad_oracle(const StateVector &initial, const SystemParams &params, double horizon,
                                     int steps, const ModeTransform &network = paper_network()) {
    params.validate();
    const auto &space = initial.space();
    if (!space.has_modes()) throw ArgumentError("lindblad_oracle needs cavity modes");
    MasterEquation eq{drive_generator(space, params.omega, params.kappa), decay_generator(space, params.kappa), {},
                      params.tau};
    cplx rate = std::sqrt(2.0 * params.kappa);
    if (space.n_atoms() == 2) {
        for (const auto &b : jump_operators(network, space, {params.phi1, params.phi2})) eq.jumps.push_back(b * rate);
    } else {
        for (int m = 0; m < space.n_modes(); ++m) eq.jumps.push_back(mode_annihilator(space, m) * rate);
    }
    return integrate_master_equation(initial, eq, horizon, steps);
}

}  // namespace hcz
