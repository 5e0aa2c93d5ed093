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

// The heralded controlled-phase gate, stage by stage:
//   prepare_inputs -> step1 -> detect_coincidence -> correction -> compare
//   with ideal_cz.
//
// Logical encoding: |0> = |gH>, |1> = |gV>.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

#include "hcz/dynamics.hpp"
#include "hcz/errors.hpp"
#include "hcz/hilbert.hpp"
#include "hcz/optics.hpp"

namespace hcz {

struct AtomInputs {
    cplx alpha1{1.0, 0.0};
    cplx beta1{0.0, 0.0};
    cplx alpha2{1.0, 0.0};
    cplx beta2{0.0, 0.0};

    void validate() const {
        if (std::abs(std::norm(alpha1) + std::norm(beta1) - 1.0) > 1e-9) {
            throw ValidationError("alpha1/beta1", "|alpha1|^2 + |beta1|^2 = 1");
        }
        if (std::abs(std::norm(alpha2) + std::norm(beta2) - 1.0) > 1e-9) {
            throw ValidationError("alpha2/beta2", "|alpha2|^2 + |beta2|^2 = 1");
        }
    }

    static AtomInputs uniform() {
        const double r = 1.0 / std::sqrt(2.0);
        return AtomInputs{r, r, r, r};
    }
};

/// Set of detectors (D1..D4) that clicked.
class DetectionPattern {
   public:
    DetectionPattern() = default;
    DetectionPattern(std::initializer_list<int> detectors) {
        for (int d : detectors) add(d);
    }

    static DetectionPattern from_mask(std::uint8_t mask) {
        DetectionPattern p;
        p.mask_ = static_cast<std::uint8_t>(mask & 0xF);
        return p;
    }

    /// Accepts "D1D3", "D1,D3", "{D1,D3}" and similar spellings.
    static DetectionPattern parse(std::string_view text) {
        DetectionPattern p;
        for (std::size_t i = 0; i < text.size(); ++i) {
            char c = text[i];
            if (c == 'D' || c == 'd') {
                if (i + 1 >= text.size() || text[i + 1] < '1' || text[i + 1] > '4') {
                    throw ArgumentError("bad detector name in pattern '" + std::string(text) + "'");
                }
                p.add(text[i + 1] - '0');
                ++i;
            } else if (c != ',' && c != '{' && c != '}' && c != ' ' && c != '+') {
                throw ArgumentError("bad character in pattern '" + std::string(text) + "'");
            }
        }
        return p;
    }

    void add(int detector) {
        if (detector < 1 || detector > 4) throw ArgumentError("detector index must be 1..4");
        mask_ = static_cast<std::uint8_t>(mask_ | (1u << (detector - 1)));
    }
    bool contains(int detector) const { return (mask_ >> (detector - 1)) & 1u; }
    std::uint8_t mask() const { return mask_; }
    int size() const { return __builtin_popcount(mask_); }

    std::string str() const {
        std::string s;
        for (int d = 1; d <= 4; ++d) {
            if (contains(d)) s += "D" + std::to_string(d);
        }
        return s.empty() ? "none" : s;
    }

    /// The two clicked detectors, ascending. Only valid when size() == 2.
    std::pair<int, int> pair() const {
        int first = 0;
        for (int d = 1; d <= 4; ++d) {
            if (contains(d)) {
                if (!first) {
                    first = d;
                } else {
                    return {first, d};
                }
            }
        }
        throw ContractError("pattern " + str() + " is not a detector pair");
    }

    bool operator==(const DetectionPattern &) const = default;

   private:
    std::uint8_t mask_ = 0;
};

/// Class A patterns herald the (+,+,+,-) state, class B the (+,+,-,+) state.
enum class PatternClass { none, A, B };

inline PatternClass pattern_class(const DetectionPattern &p) {
    switch (p.mask()) {
        case 0b0101:  // D1 D3
        case 0b1010:  // D2 D4
            return PatternClass::A;
        case 0b1001:  // D1 D4
        case 0b0110:  // D2 D3
            return PatternClass::B;
        default:
            return PatternClass::none;
    }
}

inline bool is_heralding(const DetectionPattern &p) {
    return pattern_class(p) != PatternClass::none;
}

inline std::array<DetectionPattern, 4> heralding_patterns() {
    return {DetectionPattern{1, 3}, DetectionPattern{2, 4}, DetectionPattern{1, 4}, DetectionPattern{2, 3}};
}

inline SpaceDescriptor joint_space(const SystemParams &params) {
    return SpaceDescriptor(2, 4, params.fock_cutoff);
}

/// (alpha1|gH> + beta1|gV>)(alpha2|gH> + beta2|gV>) with both cavities empty.
inline StateVector prepare_inputs(const AtomInputs &inputs, const SpaceDescriptor &space) {
    inputs.validate();
    if (space.n_atoms() != 2 || space.n_modes() != 4) throw ArgumentError("prepare_inputs needs the joint space");
    Vector v = Vector::Zero(static_cast<Eigen::Index>(space.dimension()));
    std::array<cplx, 2> one{inputs.alpha1, inputs.beta1};
    std::array<cplx, 2> two{inputs.alpha2, inputs.beta2};
    std::array<Level, 2> ground{Level::gH, Level::gV};
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            auto idx = space.index_of(BasisLabel{{ground[i], ground[j]}, {0, 0, 0, 0}});
            v[static_cast<Eigen::Index>(idx)] = one[i] * two[j];
        }
    }
    return StateVector(space, std::move(v));
}

struct Step1Result {
    StateVector state;  // normalized, conditioned on no emission
    double p_suc;       // probability neither cavity emitted
};

/// Both systems driven for tau with no emission, built from the closed-form
/// coefficients of each cavity and joined with tensor().
inline Step1Result step1(const AtomInputs &inputs, const SystemParams &params) {
    params.validate();
    inputs.validate();
    auto coeffs = closed_form_coefficients(params.omega, params.kappa, params.tau);
    SpaceDescriptor single(1, 2, params.fock_cutoff);
    StateVector one = single_system_state(inputs.alpha1, inputs.beta1, coeffs, single);
    StateVector two = single_system_state(inputs.alpha2, inputs.beta2, coeffs, single);
    double p = p_no_emission(params.omega, params.kappa, params.tau);
    return Step1Result{tensor(one, two), p * p};
}

struct HeraldedState {
    StateVector state;   // two-atom state on atom_space(2), normalized
    double probability;  // probability of this pattern within the detection window
};

/// Step 2: free decay for t_detect with path phases, then the two detector
/// jumps of `pattern`, projected on the photon vacuum.
///
/// The probability is the window integral of the two-click rate. The
/// two-photon component decays as exp(-2 kappa (t1 + t2)) in intensity, so
///   P = (1 - eta)^2 (1 - exp(-2 kappa t))^2 ||b_i b_j Phi(0)||^2,
/// with both photons surviving losses.
inline HeraldedState detect_coincidence(const StateVector &state, const DetectionPattern &pattern,
                                        const SystemParams &params, const ModeTransform &network = paper_network()) {
    params.validate();
    if (!is_heralding(pattern)) {
        throw ContractError("pattern " + pattern.str() + " does not herald a gate");
    }
    const auto &space = state.space();
    if (space.n_atoms() != 2 || space.n_modes() != 4) throw ArgumentError("detect_coincidence needs the joint space");
    if (space.fock_cutoff() >= 2 && boundary_weight(state) > 1e-12) {
        throw NumericError("amplitude reached the Fock cutoff boundary; truncation is not sufficient");
    }
    StateVector phi0 = state.normalized();
    auto b = jump_operators(network, space, {0.0, 0.0});
    auto [i, j] = pattern.pair();
    const auto &bi = b[static_cast<std::size_t>(i - 1)];
    const auto &bj = b[static_cast<std::size_t>(j - 1)];

    StateVector decayed = decay_propagate(phi0, params.kappa, params.t_detect, {params.phi1, params.phi2});
    StateVector ij = bi * (bj * decayed);
    StateVector ji = bj * (bi * decayed);
    double scale = std::max(ij.norm(), 1e-300);
    if ((ij - ji).norm() > 1e-12 * scale) {
        throw ConsistencyError("detector jumps do not commute on the step-2 state");
    }
    StateVector atoms = project_vacuum(ij);
    if (!(atoms.norm() > 1e-150)) {
        throw NumericError("pattern " + pattern.str() + " has zero amplitude for this state");
    }

    double window = -std::expm1(-2.0 * params.kappa * params.t_detect);
    double survive = (1.0 - params.eta) * (1.0 - params.eta);
    double p = survive * window * window * (bi * (bj * phi0)).norm2();
    return HeraldedState{atoms.normalized(), p};
}

struct LocalCorrection {
    LinearOperator atom1;  // on atom_space(1)
    LinearOperator atom2;
};

/// Raman pulses that return the heralded s-level state to the logical
/// g-levels: a swap gH<->sH, gV<->sV on both atoms, followed for class B
/// patterns by |gV> -> -|gV> on atom 2.
inline LocalCorrection correction_unitary(const DetectionPattern &pattern) {
    PatternClass cls = pattern_class(pattern);
    if (cls == PatternClass::none) {
        throw ContractError("pattern " + pattern.str() + " has no correction");
    }
    Eigen::Matrix4cd swap = Eigen::Matrix4cd::Zero();
    swap(0, 2) = swap(2, 0) = 1.0;
    swap(1, 3) = swap(3, 1) = 1.0;
    Eigen::Matrix4cd flip = Eigen::Matrix4cd::Identity();
    flip(1, 1) = -1.0;
    SpaceDescriptor one = atom_space(1);
    LinearOperator u1 = atom_operator(one, 1, swap);
    LinearOperator u2 = atom_operator(one, 1, cls == PatternClass::B ? Eigen::Matrix4cd(flip * swap) : swap);
    return LocalCorrection{u1, u2};
}

inline StateVector apply_correction(const LocalCorrection &c, const StateVector &atoms) {
    if (!(atoms.space() == atom_space(2))) throw ArgumentError("correction acts on the two-atom space");
    Eigen::Matrix4cd m1 = c.atom1.dense();
    Eigen::Matrix4cd m2 = c.atom2.dense();
    return atom_operator(atoms.space(), 2, m2) * (atom_operator(atoms.space(), 1, m1) * atoms);
}

/// alpha1 alpha2|00> + beta1 alpha2|10> + alpha1 beta2|01> - beta1 beta2|11>.
inline StateVector ideal_cz(const AtomInputs &inputs) {
    inputs.validate();
    SpaceDescriptor s = atom_space(2);
    Vector v = Vector::Zero(16);
    auto at = [&](Level l1, Level l2) { return static_cast<Eigen::Index>(s.index_of(BasisLabel{{l1, l2}, {}})); };
    v[at(Level::gH, Level::gH)] = inputs.alpha1 * inputs.alpha2;
    v[at(Level::gV, Level::gH)] = inputs.beta1 * inputs.alpha2;
    v[at(Level::gH, Level::gV)] = inputs.alpha1 * inputs.beta2;
    v[at(Level::gV, Level::gV)] = -inputs.beta1 * inputs.beta2;
    return StateVector(s, std::move(v));
}

struct GateOutcome {
    DetectionPattern pattern;
    StateVector heralded_state;   // s-level state right after the clicks
    StateVector corrected_state;  // after the local correction
    double p_step1 = 0.0;         // both cavities silent during step 1
    double p_herald = 0.0;        // this pattern, given step 1 succeeded
    double p_total = 0.0;         // p_step1 * p_herald
    double fidelity_cz = 0.0;
    bool corrected = false;
};

inline GateOutcome run_protocol(const AtomInputs &inputs, const SystemParams &params, const DetectionPattern &pattern,
                                const ModeTransform &network = paper_network()) {
    params.validate();
    inputs.validate();
    Step1Result s1 = step1(inputs, params);
    HeraldedState h = detect_coincidence(s1.state, pattern, params, network);
    StateVector corrected = apply_correction(correction_unitary(pattern), h.state);
    double f = fidelity(corrected, ideal_cz(inputs));
    return GateOutcome{pattern, h.state, corrected, s1.p_suc, h.probability, s1.p_suc * h.probability, f, true};
}

/// (1 - eta)^2 b^4 (1 - exp(-2 kappa t))^2 / 2, summed over the four patterns
/// and conditioned on step 1.
inline double success_probability(const SystemParams &params) {
    params.validate();
    auto c = closed_form_coefficients(params.omega, params.kappa, params.tau);
    double b2 = std::norm(c.b);
    double window = -std::expm1(-2.0 * params.kappa * params.t_detect);
    double survive = (1.0 - params.eta) * (1.0 - params.eta);
    return survive * b2 * b2 * window * window / 2.0;
}

}  // namespace hcz
