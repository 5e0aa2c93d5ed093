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

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hcz/optics.hpp"
#include "hcz/protocol.hpp"

using namespace hcz;

namespace {

const SpaceDescriptor kJoint = build_space(2, 4, 1);

double unitarity(const Eigen::MatrixXcd &m) {
    return (m * m.adjoint() - Eigen::MatrixXcd::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
}

template <class F>
std::string error_text(F &&f) {
    try {
        f();
    } catch (const std::exception &e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Elements, AreUnitary) {
    for (double theta : {0.0, 0.3, std::numbers::pi / 4, 1.9, -2.2}) {
        EXPECT_LT(unitarity(qwp_matrix(theta)), 1e-15);
        EXPECT_LT(unitarity(element_matrix({ElementKind::phase, {"a1H"}, {}, theta, 0})), 1e-15);
    }
    EXPECT_EQ(unitarity(element_matrix({ElementKind::pbs, {"a", "b", "c", "d"}, {}, 0.0, 0})), 0.0);
}

TEST(Elements, QuarterWavePlateAtZeroRetardsV) {
    Eigen::Matrix2cd q = qwp_matrix(0.0);
    EXPECT_EQ(q(0, 0), cplx(1.0));
    EXPECT_NEAR(std::abs(q(1, 1) - kI), 0.0, 1e-16);
    EXPECT_EQ(std::abs(q(0, 1)), 0.0);
}

TEST(ComposeNetwork, EmptyIsIdentity) {
    ModeTransform t = compose_network({});
    EXPECT_EQ(t.matrix, Eigen::Matrix4cd::Identity());
    EXPECT_EQ(t.output_modes, kCavityModes);
}

TEST(ComposeNetwork, SinglePhase) {
    const double phi = 0.77;
    ModeTransform t = compose_network({{ElementKind::phase, {"a1H"}, {}, phi, 0}});
    Eigen::Matrix4cd expect = Eigen::Matrix4cd::Identity();
    expect(0, 0) = std::exp(kI * phi);
    EXPECT_LT((t.matrix - expect).cwiseAbs().maxCoeff(), 1e-16);
}

TEST(ComposeNetwork, OrderedProduct) {
    // phase then qwp differs from qwp then phase
    NetworkElement ph{ElementKind::phase, {"a2V"}, {}, 0.5, 0};
    NetworkElement q{ElementKind::qwp, {"a2H", "a2V"}, {}, 0.4, 0};
    ModeTransform pq = compose_network({ph, q});
    ModeTransform qp = compose_network({q, ph});
    Eigen::Matrix2cd p2 = Eigen::Matrix2cd::Identity();
    p2(1, 1) = std::exp(0.5 * kI);
    Eigen::Matrix2cd expect = qwp_matrix(0.4) * p2;
    EXPECT_LT((pq.matrix.bottomRightCorner<2, 2>() - expect).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_GT((pq.matrix - qp.matrix).cwiseAbs().maxCoeff(), 0.1);
}

TEST(ComposeNetwork, CalibratedNetlistReproducesDetectorRows) {
    ModeTransform t = calibrated_network();
    EXPECT_LT((t.matrix - paper_network().matrix).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(t.output_modes, kDetectorModes);
    EXPECT_LT(t.unitarity_residual(), 1e-12);
}

TEST(ComposeNetwork, DanglingPortIsNamed) {
    std::string msg = error_text([] { compose_network(parse_netlist("phase a1H 0.1\nphase b7 0.2\n")); });
    EXPECT_NE(msg.find("'b7'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
    EXPECT_THROW(compose_network(parse_netlist("phase b7 0.2")), TopologyError);
    // a renamed rail is no longer available under its old name
    EXPECT_THROW(compose_network(parse_netlist("pbs a1H,a1V -> x,y\nphase a1H 0.1")), TopologyError);
}

TEST(ComposeNetwork, DoublyConsumedPortIsNamed) {
    EXPECT_THROW(compose_network(parse_netlist("qwp a1H,a1H pi/4")), TopologyError);
    std::string msg = error_text([] { compose_network(parse_netlist("qwp a1H,a1H pi/4")); });
    EXPECT_NE(msg.find("'a1H'"), std::string::npos) << msg;
    EXPECT_THROW(compose_network(parse_netlist("pbs a1H,a1V -> a2H,z")), TopologyError);
}

TEST(ComposeNetwork, ArityErrors) {
    EXPECT_THROW(compose_network(parse_netlist("qwp a1H 0.2")), TopologyError);
    EXPECT_THROW(compose_network(parse_netlist("phase a1H,a1V 0.2")), TopologyError);
    EXPECT_THROW(compose_network(parse_netlist("pbs a1H,a1V,a2H")), TopologyError);
    EXPECT_THROW(compose_network(parse_netlist("pbs a1H,a1V -> x")), TopologyError);
}

TEST(ComposeNetwork, NonFiniteElementIsACalibrationError) {
    NetworkElement bad{ElementKind::phase, {"a1H"}, {}, std::numeric_limits<double>::quiet_NaN(), 0};
    EXPECT_THROW(compose_network({bad}), CalibrationError);
}

TEST(PaperNetwork, RowsAsWritten) {
    Eigen::Matrix4cd b = paper_network().matrix;
    const double h = 0.5;
    const double r = 1.0 / std::sqrt(2.0);
    // b1 = (a1H + a1V)/2 + a2V/sqrt2, b4 = -(a1H - a1V)/2 + a2H/sqrt2
    EXPECT_EQ(b(0, 0), cplx(h));
    EXPECT_EQ(b(0, 1), cplx(h));
    EXPECT_EQ(b(0, 3), cplx(r));
    EXPECT_EQ(b(1, 3), cplx(-r));
    EXPECT_EQ(b(2, 1), cplx(-h));
    EXPECT_EQ(b(3, 0), cplx(-h));
    EXPECT_EQ(b(3, 1), cplx(h));
    EXPECT_EQ(b(3, 2), cplx(r));
}

TEST(PaperNetwork, RowProducts) {
    Eigen::Matrix4cd b = paper_network().matrix;
    EXPECT_NEAR(std::abs(b.row(0).dot(b.row(0)) - 1.0), 0.0, 1e-15);  // 1/4 + 1/4 + 1/2
    EXPECT_NEAR(std::abs(b.row(0).dot(b.row(1))), 0.0, 1e-15);
    EXPECT_LT((b * b.adjoint() - Eigen::Matrix4cd::Identity()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT(paper_network().unitarity_residual(), 1e-15);
}

TEST(JumpOperators, AnnihilateVacuum) {
    auto b = jump_operators(paper_network(), kJoint, {0.0, 0.0});
    for (const auto &bj : b) {
        for (const char *label : {"gH,gH;0,0,0,0", "sV,gH;0,0,0,0", "sH,sV;0,0,0,0"}) {
            EXPECT_EQ((bj * StateVector::basis(kJoint, label)).norm(), 0.0);
        }
    }
}

TEST(JumpOperators, PhotonNumberCompleteness) {
    for (auto phases : {std::pair{0.0, 0.0}, std::pair{0.4, -1.7}, std::pair{3.0, 2.0}}) {
        auto b = jump_operators(paper_network(), kJoint, phases);
        LinearOperator sum = LinearOperator::zero(kJoint);
        for (const auto &bj : b) sum = sum + bj.adjoint() * bj;
        EXPECT_LT((sum - total_number_operator(kJoint)).max_abs_entry(), 1e-12);
    }
    auto b = jump_operators(paper_network(), kJoint, {0.0, 0.0});
    StateVector one = StateVector::basis(kJoint, "gH,gH;1,0,0,0");
    StateVector n = LinearOperator::zero(kJoint) * one;
    for (const auto &bj : b) n = n + bj.adjoint() * (bj * one);
    EXPECT_LT((n - one).norm(), 1e-15);
}

TEST(JumpOperators, PhasesMultiplyEachCavity) {
    const double p1 = 0.3;
    const double p2 = 1.1;
    auto b0 = jump_operators(paper_network(), kJoint, {0.0, 0.0});
    auto b = jump_operators(paper_network(), kJoint, {p1, p2});
    StateVector c1 = StateVector::basis(kJoint, "gH,gH;0,1,0,0");
    StateVector c2 = StateVector::basis(kJoint, "gH,gH;0,0,1,0");
    for (std::size_t j = 0; j < 4; ++j) {
        EXPECT_LT((b[j] * c1 - (b0[j] * c1) * std::exp(-kI * p1)).norm(), 1e-15);
        EXPECT_LT((b[j] * c2 - (b0[j] * c2) * std::exp(-kI * p2)).norm(), 1e-15);
    }
}

TEST(JumpOperators, CoincidenceOnTwoPhotonComponent) {
    // Expand b1 b3 by hand over the four two-photon terms
    // (photon in 1H or 1V) x (photon in 2H or 2V): only cross terms between
    // one cavity-1 row entry and one cavity-2 row entry survive.
    auto b = jump_operators(paper_network(), kJoint, {0.0, 0.0});
    const double r = 1.0 / (2.0 * std::sqrt(2.0));
    struct Term {
        const char *in;
        const char *out;
        double coef;
    };
    for (Term t : {Term{"sH,sH;1,0,1,0", "sH,sH;0,0,0,0", r}, Term{"sV,sH;0,1,1,0", "sV,sH;0,0,0,0", r},
                   Term{"sH,sV;1,0,0,1", "sH,sV;0,0,0,0", r}, Term{"sV,sV;0,1,0,1", "sV,sV;0,0,0,0", -r}}) {
        StateVector out = b[0] * (b[2] * StateVector::basis(kJoint, t.in));
        EXPECT_NEAR(std::abs(out.amplitude(t.out) - t.coef), 0.0, 1e-15) << t.in;
        EXPECT_NEAR(out.norm(), r, 1e-15);
    }

    // same pattern on the full step-1 state, after dividing out the inputs
    SystemParams p;
    AtomInputs in{0.6, cplx(0.0, 0.8), std::sqrt(0.5), -std::sqrt(0.5)};
    StateVector phi = step1(in, p).state;
    StateVector atoms = project_vacuum(b[0] * (b[2] * phi));
    auto c = closed_form_coefficients(p.omega, p.kappa, p.tau);
    cplx pre = (-kI * c.b) * (-kI * c.b);
    EXPECT_NEAR(std::abs(atoms.amplitude("sH,sH") - pre * r * in.alpha1 * in.alpha2), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(atoms.amplitude("sV,sH") - pre * r * in.beta1 * in.alpha2), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(atoms.amplitude("sH,sV") - pre * r * in.alpha1 * in.beta2), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(atoms.amplitude("sV,sV") + pre * r * in.beta1 * in.beta2), 0.0, 1e-14);
}

TEST(JumpOperators, SingleClickProbabilitiesArePhaseInvariant) {
    SystemParams p;
    StateVector phi = step1(AtomInputs::uniform(), p).state;
    auto b0 = jump_operators(paper_network(), kJoint, {0.0, 0.0});
    for (double p1 : {0.0, 0.9, 2.5, -1.3}) {
        for (double p2 : {0.0, 0.4, 3.1}) {
            auto b = jump_operators(paper_network(), kJoint, {p1, p2});
            for (std::size_t j = 0; j < 4; ++j) {
                EXPECT_NEAR((b[j] * phi).norm2(), (b0[j] * phi).norm2(), 1e-12);
            }
        }
    }
}

TEST(JumpOperators, Errors) {
    ModeTransform bad = paper_network();
    bad.matrix *= 1.01;
    EXPECT_THROW(jump_operators(bad, kJoint, {0.0, 0.0}), CalibrationError);
    bad.matrix(0, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(jump_operators(bad, kJoint, {0.0, 0.0}), CalibrationError);
    EXPECT_THROW(jump_operators(paper_network(), build_space(1, 2, 1), {0.0, 0.0}), ArgumentError);
}

TEST(Netlist, ParsesAngles) {
    EXPECT_NEAR(*parse_angle("pi/4"), std::numbers::pi / 4, 1e-16);
    EXPECT_NEAR(*parse_angle("-pi/2"), -std::numbers::pi / 2, 1e-16);
    EXPECT_NEAR(*parse_angle("3*pi/8"), 3 * std::numbers::pi / 8, 1e-16);
    EXPECT_NEAR(*parse_angle("pi"), std::numbers::pi, 1e-16);
    EXPECT_EQ(*parse_angle("0.25"), 0.25);
    EXPECT_EQ(*parse_angle("+1e-3"), 1e-3);
    EXPECT_FALSE(parse_angle("pi/0"));
    EXPECT_FALSE(parse_angle("2pi"));
    EXPECT_FALSE(parse_angle("abc"));
    EXPECT_FALSE(parse_angle(""));
}

TEST(Netlist, ParsesElements) {
    auto el = parse_netlist("# comment only\n\n  qwp a1H,a1V pi/4   # trailing\npbs a1H,a1V,a2H,a2V -> A,B,C,D\n");
    ASSERT_EQ(el.size(), 2u);
    EXPECT_EQ(el[0].kind, ElementKind::qwp);
    EXPECT_EQ(el[0].line, 3);
    EXPECT_EQ(el[0].inputs, (std::vector<std::string>{"a1H", "a1V"}));
    EXPECT_TRUE(el[0].outputs.empty());
    EXPECT_NEAR(el[0].parameter, std::numbers::pi / 4, 1e-16);
    EXPECT_EQ(el[1].kind, ElementKind::pbs);
    EXPECT_EQ(el[1].outputs, (std::vector<std::string>{"A", "B", "C", "D"}));
}

TEST(Netlist, ErrorsCarryLineAndColumn) {
    struct Case {
        const char *text;
        int line;
        int column;
    };
    for (Case c : {Case{"mirror a1H", 1, 1}, Case{"phase a1H pi/2\n  qwp a1H,a1V bogus\n", 2, 15},
                   Case{"\nphase a1H 0.1 extra", 2, 15}, Case{"qwp a1H,,a1V 0.1", 1, 9},
                   Case{"phase a1H", 1, 10}, Case{"pbs a1H,a1V ->", 1, 13}}) {
        try {
            parse_netlist(c.text);
            ADD_FAILURE() << "no error for: " << c.text;
        } catch (const ParseError &e) {
            EXPECT_EQ(e.line, c.line) << c.text;
            EXPECT_EQ(e.column, c.column) << c.text;
        }
    }
}

TEST(TransformJson, RoundTrip) {
    ModeTransform t = calibrated_network();
    nlohmann::json j = transform_to_json(t);
    ASSERT_EQ(j.size(), 4u);
    ASSERT_EQ(j[0].size(), 4u);
    ASSERT_EQ(j[0][0].size(), 2u);
    ModeTransform back = transform_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(back.matrix, t.matrix);
    EXPECT_THROW(transform_from_json(nlohmann::json::array({1, 2, 3})), ArgumentError);
}
