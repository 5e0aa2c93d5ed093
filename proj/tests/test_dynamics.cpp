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

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <numbers>
#include <random>

#include "hcz/dynamics.hpp"

using namespace hcz;

namespace {

// exp(-i M tau) (1, 0) for M = [[0, W], [W, -i k]] by diagonalization.
Eigen::Vector2cd oracle_two_level(double omega, double kappa, double tau) {
    Eigen::Matrix2cd m;
    m << 0.0, omega, omega, cplx(0.0, -kappa);
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(m);
    Eigen::Matrix2cd v = es.eigenvectors();
    Eigen::Vector2cd lam = es.eigenvalues();
    Eigen::Vector2cd e0(1.0, 0.0);
    Eigen::Vector2cd c = v.inverse() * e0;
    for (int k = 0; k < 2; ++k) c[k] *= std::exp(-kI * lam[k] * tau);
    return v * c;
}

StateVector ground_superposition(const SpaceDescriptor &s, cplx al, cplx be) {
    return StateVector::basis(s, "gH;0,0") * al + StateVector::basis(s, "gV;0,0") * be;
}

StateVector random_state(const SpaceDescriptor &s, std::mt19937_64 &rng) {
    std::normal_distribution<double> n;
    Vector v(static_cast<Eigen::Index>(s.dimension()));
    for (auto &x : v) x = cplx(n(rng), n(rng));
    return StateVector(s, v).normalized();
}

const SpaceDescriptor kSingle = build_space(1, 2, 1);

}  // namespace

TEST(SystemParams, Validation) {
    SystemParams p;
    EXPECT_NO_THROW(p.validate());
    p.eta = 1.5;
    try {
        p.validate();
        FAIL();
    } catch (const ValidationError &e) {
        EXPECT_EQ(e.field, "eta");
        EXPECT_NE(std::string(e.what()).find("[0,1]"), std::string::npos);
    }
    p = SystemParams{};
    p.omega = 0.0;
    EXPECT_THROW(p.validate(), ValidationError);
    p = SystemParams{};
    p.kappa = -1.0;
    EXPECT_THROW(p.validate(), ValidationError);
}

TEST(EffectiveHamiltonian, ActsTermByTerm) {
    const double omega = 0.7;
    auto h = effective_hamiltonian(kSingle, omega, 1);
    StateVector out = h * StateVector::basis(kSingle, "gH;0,0");
    EXPECT_NEAR(std::abs(out.amplitude("sH;1,0") - omega), 0.0, 1e-15);
    EXPECT_NEAR(out.norm2(), omega * omega, 1e-15);
    StateVector back = h * StateVector::basis(kSingle, "sH;1,0");
    EXPECT_NEAR(std::abs(back.amplitude("gH;0,0") - omega), 0.0, 1e-15);
    EXPECT_NEAR(back.norm2(), omega * omega, 1e-15);
    // dark: s level with an empty cavity
    EXPECT_EQ((h * StateVector::basis(kSingle, "sV;0,0")).norm2(), 0.0);
    EXPECT_EQ((h.adjoint() - h).max_abs_entry(), 0.0);
}

TEST(EffectiveHamiltonian, JointSpaceActsOnOwnCavity) {
    SpaceDescriptor s = build_space(2, 4, 1);
    auto h2 = effective_hamiltonian(s, 1.0, 2);
    StateVector out = h2 * StateVector::basis(s, "gH,gV;0,0,0,0");
    EXPECT_EQ(out.amplitude("gH,sV;0,0,0,1"), cplx(1.0));
    EXPECT_THROW(effective_hamiltonian(atom_space(1), 1.0, 1), ArgumentError);
}

TEST(NoJumpGenerator, KappaZeroIsHamiltonian) {
    auto h = effective_hamiltonian(kSingle, 1.3, 1);
    EXPECT_EQ((no_jump_generator(kSingle, 1.3, 0.0, 1) - h).max_abs_entry(), 0.0);
}

TEST(NoJumpGenerator, AntiHermitianPartIsMinusIKappaN) {
    const double kappa = 0.4;
    auto g = no_jump_generator(kSingle, 1.0, kappa, 1);
    DenseMatrix anti = (g.dense() - g.dense().adjoint()) / 2.0;
    for (std::size_t i = 0; i < kSingle.dimension(); ++i) {
        for (std::size_t j = 0; j < kSingle.dimension(); ++j) {
            cplx expect = i == j ? cplx(0.0, -kappa * kSingle.total_photons(i)) : cplx(0.0);
            EXPECT_NEAR(std::abs(anti(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - expect), 0.0,
                        1e-15);
        }
    }
    // d|psi|^2/dt = <psi| i(G^dag - G) |psi>, and that operator is negative
    // semidefinite: the norm never grows
    DenseMatrix d = kI * (g.dense().adjoint() - g.dense());
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(d);
    EXPECT_LE(es.eigenvalues().maxCoeff(), 1e-14);
}

TEST(EvolveNoJump, ZeroDurationIsIdentity) {
    std::mt19937_64 rng(1);
    StateVector psi = random_state(kSingle, rng);
    auto g = no_jump_generator(kSingle, 1.0, 0.2, 1);
    EXPECT_EQ((evolve_no_jump(psi, g, 0.0, 1) - psi).norm(), 0.0);
}

TEST(EvolveNoJump, UnitaryWithoutDamping) {
    std::mt19937_64 rng(2);
    StateVector psi = random_state(kSingle, rng);
    auto g = no_jump_generator(kSingle, 1.0, 0.0, 1);
    EXPECT_NEAR(evolve_no_jump(psi, g, 1.3, 1).norm2(), 1.0, 1e-10);
}

TEST(EvolveNoJump, MatchesTwoLevelOracle) {
    auto g = no_jump_generator(kSingle, 1.0, 0.2, 1);
    StateVector out = evolve_no_jump(StateVector::basis(kSingle, "gH;0,0"), g, 1.3, 1);
    Eigen::Vector2cd ref = oracle_two_level(1.0, 0.2, 1.3);
    EXPECT_NEAR(std::abs(out.amplitude("gH;0,0") - ref[0]), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(out.amplitude("sH;1,0") - ref[1]), 0.0, 1e-12);
    auto c = closed_form_coefficients(1.0, 0.2, 1.3);
    double n = out.norm();
    EXPECT_NEAR(std::abs(out.amplitude("gH;0,0") / n - c.a), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(out.amplitude("sH;1,0") / n - (-kI * c.b)), 0.0, 1e-10);
}

TEST(EvolveNoJump, StepHalvingConverges) {
    std::mt19937_64 rng(3);
    SpaceDescriptor s = build_space(2, 4, 1);
    StateVector psi = random_state(s, rng);
    auto g = drive_generator(s, 1.0, 0.2);
    StateVector a = evolve_no_jump(psi, g, 2.0, 4);
    StateVector b = evolve_no_jump(psi, g, 2.0, 8);
    EXPECT_LT((a - b).norm(), 1e-10);
}

TEST(EvolveNoJump, LargeSpaceUsesStepwiseIntegrator) {
    std::mt19937_64 rng(4);
    SpaceDescriptor big = build_space(2, 4, 2);  // 1296 > dense limit
    SpaceDescriptor small = build_space(2, 4, 1);
    StateVector psi_small = random_state(small, rng);
    Vector v = Vector::Zero(static_cast<Eigen::Index>(big.dimension()));
    for (std::size_t i = 0; i < small.dimension(); ++i) {
        v[static_cast<Eigen::Index>(big.index_of(small.label_of(i)))] = psi_small[i];
    }
    StateVector psi_big(big, v);
    // only states that stay below two photons per mode compare cleanly
    StateVector g0 = StateVector::basis(small, "gH,gV;0,0,0,0");
    StateVector g0_big = StateVector::basis(big, "gH,gV;0,0,0,0");
    StateVector a = evolve_no_jump(g0, drive_generator(small, 1.0, 0.2), 1.3, 1);
    StateVector b = evolve_no_jump(g0_big, drive_generator(big, 1.0, 0.2), 1.3, 4);
    for (std::size_t i = 0; i < small.dimension(); ++i) {
        EXPECT_NEAR(std::abs(a[i] - b[big.index_of(small.label_of(i))]), 0.0, 1e-12);
    }
    EXPECT_NEAR(b.norm2(), a.norm2(), 1e-12);
    (void)psi_big;
}

TEST(EvolveNoJump, Errors) {
    auto g = no_jump_generator(kSingle, 1.0, 0.2, 1);
    StateVector psi = StateVector::basis(kSingle, 0);
    EXPECT_THROW(evolve_no_jump(psi, g, 1.0, 0), ArgumentError);
    Vector v = psi.amplitudes();
    v[0] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(evolve_no_jump(StateVector(kSingle, v), g, 1.0, 1), NumericError);
    EXPECT_THROW(evolve_no_jump(StateVector::basis(build_space(1, 2, 2), 0), g, 1.0, 1), ArgumentError);
}

TEST(ClosedForm, QuarterRabiPeriod) {
    auto c = closed_form_coefficients(1.0, 0.0, std::numbers::pi / 2);
    EXPECT_NEAR(std::abs(c.a), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(c.b - 1.0), 0.0, 1e-15);
}

TEST(ClosedForm, ZeroTime) {
    for (double kappa : {0.0, 0.2, 5.0}) {
        auto c = closed_form_coefficients(1.0, kappa, 0.0);
        EXPECT_EQ(c.a, cplx(1.0));
        EXPECT_EQ(c.b, cplx(0.0));
    }
}

TEST(ClosedForm, UndampedIsCosSin) {
    for (double tau : {0.1, 0.9, 2.5}) {
        auto c = closed_form_coefficients(1.7, 0.0, tau);
        EXPECT_NEAR(std::abs(c.a - std::cos(1.7 * tau)), 0.0, 1e-15);
        EXPECT_NEAR(std::abs(c.b - std::sin(1.7 * tau)), 0.0, 1e-15);
    }
}

TEST(ClosedForm, MatchesOracleAcrossRegimes) {
    for (double omega : {0.03, 0.1, 0.2, 1.0, 3.0}) {
        for (double tau : {0.0, 0.3, 1.3, 7.0, 40.0}) {
            const double kappa = 0.2;  // omega = 0.1 is critical
            auto c = closed_form_coefficients(omega, kappa, tau);
            EXPECT_NEAR(std::norm(c.a) + std::norm(c.b), 1.0, 1e-12);
            Eigen::Vector2cd ref = oracle_two_level(omega, kappa, tau);
            if (std::abs(omega - kappa / 2) < 1e-12) continue;  // defective matrix: oracle not diagonalizable
            double n = ref.norm();
            EXPECT_NEAR(std::abs(c.a - ref[0] / n), 0.0, 1e-10) << omega << " " << tau;
            EXPECT_NEAR(std::abs(c.b - kI * ref[1] / n), 0.0, 1e-10) << omega << " " << tau;
        }
    }
}

TEST(ClosedForm, CriticalDampingIsContinuous) {
    const double kappa = 0.2;
    const double tau = 3.0;
    auto at = closed_form_coefficients(kappa / 2, kappa, tau);
    auto above = closed_form_coefficients(kappa / 2 * (1 + 1e-7), kappa, tau);
    auto below = closed_form_coefficients(kappa / 2 * (1 - 1e-7), kappa, tau);
    EXPECT_NEAR(std::abs(at.a - above.a), 0.0, 1e-6);
    EXPECT_NEAR(std::abs(at.a - below.a), 0.0, 1e-6);
    EXPECT_NEAR(std::abs(at.b - below.b), 0.0, 1e-6);
    // analytic limit: ground = 1 + kappa tau / 2, photon = omega tau, times exp(-kappa tau / 2)
    double g = 1.0 + kappa * tau / 2.0;
    double ph = kappa / 2 * tau;
    double n = std::hypot(g, ph);
    EXPECT_NEAR(std::abs(at.a - g / n), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(at.b - ph / n), 0.0, 1e-12);
    EXPECT_NEAR(p_no_emission(kappa / 2, kappa, tau), std::exp(-kappa * tau) * (g * g + ph * ph), 1e-12);
}

TEST(ClosedForm, StronglyOverdampedStaysFinite) {
    auto c = closed_form_coefficients(0.01, 50.0, 1e4);
    EXPECT_TRUE(std::isfinite(c.a.real()) && std::isfinite(c.b.real()));
    EXPECT_NEAR(std::norm(c.a) + std::norm(c.b), 1.0, 1e-12);
    double p = p_no_emission(0.01, 50.0, 1e4);
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
}

TEST(ClosedForm, ReferenceValues) {
    // normalized a, b and survival at (1, 0.2, 1.3), from an independent
    // scipy.linalg.expm evaluation of the 2x2 block
    auto c = closed_form_coefficients(1.0, 0.2, 1.3);
    EXPECT_NEAR(c.a.real(), 0.357843905, 1e-9);
    EXPECT_NEAR(c.b.real(), 0.933781419, 1e-9);
    EXPECT_NEAR(p_no_emission(1.0, 0.2, 1.3), 0.82627, 1e-5);
}

TEST(ClosedForm, Errors) {
    EXPECT_THROW(closed_form_coefficients(0.0, 0.2, 1.0), ArgumentError);
    EXPECT_THROW(closed_form_coefficients(1.0, -0.2, 1.0), ArgumentError);
    EXPECT_THROW(closed_form_coefficients(1.0, 0.2, -1.0), ArgumentError);
}

TEST(PNoEmission, Limits) {
    EXPECT_NEAR(p_no_emission(1.0, 0.0, 2.0), 1.0, 1e-15);
    EXPECT_NEAR(p_no_emission(1.0, 0.3, 0.0), 1.0, 1e-15);
}

TEST(PNoEmission, EqualsEvolvedNormForAnyGroundSuperposition) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    auto g = no_jump_generator(kSingle, 1.0, 0.2, 1);
    double p = p_no_emission(1.0, 0.2, 1.3);
    for (int k = 0; k < 10; ++k) {
        cplx al(n(rng), n(rng));
        cplx be(n(rng), n(rng));
        double s = std::sqrt(std::norm(al) + std::norm(be));
        StateVector out = evolve_no_jump(ground_superposition(kSingle, al / s, be / s), g, 1.3, 1);
        EXPECT_NEAR(out.norm2(), p, 1e-10);
    }
    EXPECT_NEAR(p, oracle_two_level(1.0, 0.2, 1.3).squaredNorm(), 1e-12);
}

TEST(PNoEmission, NonIncreasingInKappaUpToOmega) {
    for (double tau : {0.5, 1.3, 4.0}) {
        double prev = 1.0;
        for (int k = 0; k <= 40; ++k) {
            double p = p_no_emission(1.0, 0.025 * k, tau);
            EXPECT_LE(p, prev + 1e-15);
            prev = p;
        }
    }
}

TEST(PNoEmission, StrongDampingFreezesTheDrive) {
    // past kappa ~ 1.5 omega more damping suppresses the excitation and the
    // survival rises again
    EXPECT_GT(p_no_emission(1.0, 2.0, 4.0), p_no_emission(1.0, 1.6, 4.0));
    EXPECT_GT(p_no_emission(1.0, 20.0, 4.0), 0.5);
}

TEST(SingleSystemState, Examples) {
    StateVector a = single_system_state(1.0, 0.0, {1.0, 0.0, 0.0}, kSingle);
    EXPECT_EQ((a - StateVector::basis(kSingle, "gH;0,0")).norm(), 0.0);
    StateVector b = single_system_state(0.0, 1.0, {0.0, 1.0, 0.0}, kSingle);
    EXPECT_NEAR(std::abs(b.amplitude("sV;0,1") - (-kI)), 0.0, 1e-15);
    EXPECT_NEAR(b.norm2(), 1.0, 1e-15);
}

TEST(SingleSystemState, MatchesRenormalizedEvolution) {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> n;
    std::uniform_real_distribution<double> u(0.05, 3.0);
    for (int k = 0; k < 20; ++k) {
        double omega = u(rng);
        double kappa = u(rng);
        double tau = u(rng);
        cplx al(n(rng), n(rng));
        cplx be(n(rng), n(rng));
        double s = std::sqrt(std::norm(al) + std::norm(be));
        al /= s;
        be /= s;
        StateVector closed = single_system_state(al, be, closed_form_coefficients(omega, kappa, tau), kSingle);
        StateVector numeric =
            evolve_no_jump(ground_superposition(kSingle, al, be), no_jump_generator(kSingle, omega, kappa, 1), tau, 1);
        EXPECT_GE(fidelity(closed, numeric), 1.0 - 1e-10);
        EXPECT_LT((closed - numeric.normalized()).norm(), 1e-10);
    }
}

TEST(SingleSystemState, RejectsUnnormalizedInput) {
    EXPECT_THROW(single_system_state(1.0, 1.0, {1.0, 0.0, 0.0}, kSingle), ArgumentError);
    EXPECT_THROW(single_system_state(1.0, 0.0, {1.0, 0.0, 0.0}, build_space(2, 4, 1)), ArgumentError);
}

TEST(DecayPropagate, Identity) {
    std::mt19937_64 rng(7);
    StateVector psi = random_state(build_space(2, 4, 1), rng);
    EXPECT_LT((decay_propagate(psi, 0.3, 0.0, {0.0, 0.0}) - psi).norm(), 1e-15);
}

TEST(DecayPropagate, LongTimeLeavesPhotonFreePart) {
    SpaceDescriptor s = build_space(2, 4, 1);
    StateVector psi = StateVector::basis(s, "gH,gH;0,0,0,0") * 0.6 + StateVector::basis(s, "sH,gH;1,0,0,0") * 0.8;
    StateVector out = decay_propagate(psi, 1.0, 50.0, {0.4, 0.1});
    EXPECT_NEAR(std::abs(out.amplitude("gH,gH;0,0,0,0")), 1.0, 1e-15);
}

TEST(DecayPropagate, EqualsDecayGeneratorThenPhases) {
    std::mt19937_64 rng(8);
    SpaceDescriptor s = build_space(2, 4, 1);
    StateVector psi = random_state(s, rng);
    StateVector direct = decay_propagate(psi, 1.0, 0.7, {0.3, 1.1});
    StateVector evolved = evolve_no_jump(psi, decay_generator(s, 1.0), 0.7, 1);
    StateVector phased = (path_phase_operator(s, {0.3, 1.1}) * evolved).normalized();
    EXPECT_LT((direct - phased).norm(), 1e-10);
}

TEST(Lindblad, StationaryDarkState) {
    SystemParams p;
    SpaceDescriptor s = build_space(1, 2, 1);
    StateVector dark = StateVector::basis(s, "sH;0,0");
    DensityMatrix rho = lindblad_oracle(dark, p, 3.0, 300);
    EXPECT_LT((rho.matrix() - DensityMatrix::pure(dark).matrix()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Lindblad, UnitaryLimit) {
    SystemParams p;
    p.kappa = 0.0;
    p.tau = 2.0;
    SpaceDescriptor s = build_space(2, 4, 1);
    StateVector psi0 = StateVector::basis(s, "gH,gV;0,0,0,0");
    DensityMatrix rho = lindblad_oracle(psi0, p, 1.5, 600);
    EXPECT_NEAR(rho.purity(), 1.0, 1e-8);
    EXPECT_NEAR(rho.trace(), 1.0, 1e-8);
    StateVector psi = evolve_no_jump(psi0, drive_generator(s, p.omega, 0.0), 1.5, 1);
    EXPECT_LT(trace_distance(rho, DensityMatrix::pure(psi)), 1e-8);
}

TEST(Lindblad, JumpRateIsTwiceKappa) {
    // free decay of one photon: population exp(-2 kappa t), the same as the
    // squared no-jump amplitude exp(-kappa t)
    SystemParams p;
    p.kappa = 0.3;
    p.tau = 0.0;
    SpaceDescriptor s = build_space(1, 2, 1);
    StateVector one = StateVector::basis(s, "sH;1,0");
    DensityMatrix rho = lindblad_oracle(one, p, 2.0, 400);
    auto i1 = static_cast<Eigen::Index>(s.index_of_string("sH;1,0"));
    auto i0 = static_cast<Eigen::Index>(s.index_of_string("sH;0,0"));
    EXPECT_NEAR(rho.matrix()(i1, i1).real(), std::exp(-2.0 * 0.3 * 2.0), 1e-10);
    EXPECT_NEAR(rho.matrix()(i0, i0).real(), 1.0 - std::exp(-2.0 * 0.3 * 2.0), 1e-10);
    StateVector nj = evolve_no_jump(one, decay_generator(s, 0.3), 2.0, 1);
    EXPECT_NEAR(nj.norm2(), rho.matrix()(i1, i1).real(), 1e-10);
}

TEST(Lindblad, TraceDriftSuggestsMoreSteps) {
    SystemParams p;
    p.omega = 5.0;
    p.kappa = 2.0;
    SpaceDescriptor s = build_space(1, 2, 1);
    try {
        lindblad_oracle(StateVector::basis(s, "gH;0,0"), p, 30.0, 3);
        FAIL() << "expected NumericError";
    } catch (const NumericError &e) {
        EXPECT_NE(std::string(e.what()).find("steps"), std::string::npos);
    }
}

TEST(TraceDistance, Basics) {
    SpaceDescriptor s = atom_space(1);
    auto a = DensityMatrix::pure(StateVector::basis(s, 0));
    auto b = DensityMatrix::pure(StateVector::basis(s, 1));
    EXPECT_NEAR(trace_distance(a, a), 0.0, 1e-15);
    EXPECT_NEAR(trace_distance(a, b), 1.0, 1e-15);
    EXPECT_THROW(trace_distance(a, DensityMatrix::pure(StateVector::basis(atom_space(2), 0))), ArgumentError);
}
