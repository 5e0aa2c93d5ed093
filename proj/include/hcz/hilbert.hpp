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

// Joint Hilbert space of up to two four-level atoms (gH, gV, sH, sV) and the
// polarization modes of their cavities, truncated at a fixed photon number.
//
// Basis ordering (part of the public contract, serialized with every dump):
// mixed radix, atom-major. The digits from most to least significant are
// atom 1 level, atom 2 level, then the photon number of each mode in the
// order c1H, c1V, c2H, c2V. Levels are ordered gH < gV < sH < sV.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hcz/errors.hpp"

namespace hcz {

using cplx = std::complex<double>;
using Vector = Eigen::VectorXcd;
using DenseMatrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx>;

inline constexpr cplx kI{0.0, 1.0};

enum class Level : std::uint8_t { gH = 0, gV = 1, sH = 2, sV = 3 };
inline constexpr std::array<Level, 4> kLevels{Level::gH, Level::gV, Level::sH, Level::sV};

inline std::string_view level_name(Level level) {
    static constexpr std::array<std::string_view, 4> names{"gH", "gV", "sH", "sV"};
    return names[static_cast<std::size_t>(level)];
}

inline Level parse_level(std::string_view name) {
    for (Level l : kLevels) {
        if (level_name(l) == name) {
            return l;
        }
    }
    throw ArgumentError("unknown atomic level '" + std::string(name) + "'");
}

inline constexpr std::array<std::string_view, 4> kModeNames{"c1H", "c1V", "c2H", "c2V"};

/// Decomposed basis label: one level per atom, one photon number per mode.
struct BasisLabel {
    std::vector<Level> levels;
    std::vector<int> photons;

    bool operator==(const BasisLabel &) const = default;
};

class SpaceDescriptor {
   public:
    SpaceDescriptor() = default;

    SpaceDescriptor(int n_atoms, int n_modes, int fock_cutoff)
        : n_atoms_(n_atoms), n_modes_(n_modes), fock_cutoff_(fock_cutoff) {
        if (n_atoms != 1 && n_atoms != 2) {
            throw ArgumentError("n_atoms must be 1 or 2, got " + std::to_string(n_atoms));
        }
        if (n_modes != 0 && n_modes != 2 * n_atoms) {
            throw ArgumentError(
                "n_modes must be 0 or 2 per atom (" + std::to_string(2 * n_atoms) + "), got " +
                std::to_string(n_modes));
        }
        if (fock_cutoff < 1) {
            throw ArgumentError("fock_cutoff must be >= 1, got " + std::to_string(fock_cutoff));
        }
        std::size_t stride = 1;
        for (int m = n_modes - 1; m >= 0; --m) {
            mode_stride_[m] = stride;
            stride *= static_cast<std::size_t>(fock_cutoff + 1);
        }
        for (int a = n_atoms - 1; a >= 0; --a) {
            atom_stride_[a] = stride;
            stride *= 4;
        }
        dimension_ = stride;
    }

    int n_atoms() const { return n_atoms_; }
    int n_modes() const { return n_modes_; }
    int fock_cutoff() const { return fock_cutoff_; }
    std::size_t dimension() const { return dimension_; }
    bool has_modes() const { return n_modes_ > 0; }

    std::string_view mode_name(int mode) const {
        check_mode(mode);
        return kModeNames[static_cast<std::size_t>(mode)];
    }

    int mode_index(std::string_view name) const {
        for (int m = 0; m < n_modes_; ++m) {
            if (kModeNames[static_cast<std::size_t>(m)] == name) {
                return m;
            }
        }
        throw ArgumentError("unknown mode label '" + std::string(name) + "' in this space");
    }

    /// Mode index of polarization (0 = H, 1 = V) of the given 1-based cavity.
    int mode_of(int cavity, int polarization) const {
        int m = 2 * (cavity - 1) + polarization;
        check_mode(m);
        return m;
    }

    /// 1-based cavity that a mode belongs to.
    static int cavity_of_mode(int mode) { return mode / 2 + 1; }

    std::size_t atom_stride(int atom) const {
        check_atom(atom);
        return atom_stride_[atom - 1];
    }
    std::size_t mode_stride(int mode) const {
        check_mode(mode);
        return mode_stride_[mode];
    }

    Level level(std::size_t index, int atom) const {
        return static_cast<Level>((index / atom_stride(atom)) % 4);
    }
    int photons(std::size_t index, int mode) const {
        return static_cast<int>((index / mode_stride(mode)) % static_cast<std::size_t>(fock_cutoff_ + 1));
    }
    int total_photons(std::size_t index) const {
        int n = 0;
        for (int m = 0; m < n_modes_; ++m) {
            n += photons(index, m);
        }
        return n;
    }
    int cavity_photons(std::size_t index, int cavity) const {
        return photons(index, mode_of(cavity, 0)) + photons(index, mode_of(cavity, 1));
    }

    BasisLabel label_of(std::size_t index) const {
        if (index >= dimension_) {
            throw ArgumentError("basis index out of range");
        }
        BasisLabel out;
        for (int a = 1; a <= n_atoms_; ++a) {
            out.levels.push_back(level(index, a));
        }
        for (int m = 0; m < n_modes_; ++m) {
            out.photons.push_back(photons(index, m));
        }
        return out;
    }

    std::size_t index_of(const BasisLabel &label) const {
        if (label.levels.size() != static_cast<std::size_t>(n_atoms_) ||
            label.photons.size() != static_cast<std::size_t>(n_modes_)) {
            throw ArgumentError("basis label shape does not match the space");
        }
        std::size_t index = 0;
        for (int a = 0; a < n_atoms_; ++a) {
            index += atom_stride_[a] * static_cast<std::size_t>(label.levels[a]);
        }
        for (int m = 0; m < n_modes_; ++m) {
            int n = label.photons[m];
            if (n < 0 || n > fock_cutoff_) {
                throw ArgumentError("photon number outside [0, fock_cutoff]");
            }
            index += mode_stride_[m] * static_cast<std::size_t>(n);
        }
        return index;
    }

    /// e.g. "gH,sV;0,0,1,0". Atom-only spaces omit the photon part.
    std::string label_string(std::size_t index) const {
        BasisLabel l = label_of(index);
        std::string s;
        for (std::size_t a = 0; a < l.levels.size(); ++a) {
            if (a) s += ',';
            s += level_name(l.levels[a]);
        }
        if (n_modes_ > 0) {
            s += ';';
            for (std::size_t m = 0; m < l.photons.size(); ++m) {
                if (m) s += ',';
                s += std::to_string(l.photons[m]);
            }
        }
        return s;
    }

    std::size_t index_of_string(std::string_view text) const {
        BasisLabel l;
        auto semi = text.find(';');
        std::string_view levels = text.substr(0, semi);
        std::string_view photons = semi == std::string_view::npos ? std::string_view{} : text.substr(semi + 1);
        auto split = [](std::string_view s) {
            std::vector<std::string_view> parts;
            std::size_t start = 0;
            while (start <= s.size()) {
                auto comma = s.find(',', start);
                if (comma == std::string_view::npos) comma = s.size();
                parts.push_back(s.substr(start, comma - start));
                start = comma + 1;
            }
            return parts;
        };
        for (auto p : split(levels)) l.levels.push_back(parse_level(p));
        if (semi != std::string_view::npos) {
            for (auto p : split(photons)) {
                if (p.empty()) throw ArgumentError("empty photon number in label");
                l.photons.push_back(std::stoi(std::string(p)));
            }
        }
        return index_of(l);
    }

    std::string ordering_description() const {
        std::string s = "atom-major mixed radix; factors (most significant first):";
        for (int a = 1; a <= n_atoms_; ++a) {
            s += " atom" + std::to_string(a) + "[gH,gV,sH,sV]";
        }
        for (int m = 0; m < n_modes_; ++m) {
            s += " " + std::string(kModeNames[static_cast<std::size_t>(m)]) + "[0.." +
                 std::to_string(fock_cutoff_) + "]";
        }
        return s;
    }

    bool operator==(const SpaceDescriptor &o) const {
        return n_atoms_ == o.n_atoms_ && n_modes_ == o.n_modes_ && fock_cutoff_ == o.fock_cutoff_;
    }

   private:
    void check_atom(int atom) const {
        if (atom < 1 || atom > n_atoms_) {
            throw ArgumentError("atom index " + std::to_string(atom) + " not in this space");
        }
    }
    void check_mode(int mode) const {
        if (mode < 0 || mode >= n_modes_) {
            throw ArgumentError("mode index " + std::to_string(mode) + " not in this space");
        }
    }

    int n_atoms_ = 1;
    int n_modes_ = 0;
    int fock_cutoff_ = 1;
    std::size_t dimension_ = 4;
    std::array<std::size_t, 2> atom_stride_{1, 1};
    std::array<std::size_t, 4> mode_stride_{1, 1, 1, 1};
};

inline SpaceDescriptor build_space(int n_atoms, int n_modes, int fock_cutoff) {
    return SpaceDescriptor(n_atoms, n_modes, fock_cutoff);
}

/// Atoms only, no cavity modes. Used for heralded states and local corrections.
inline SpaceDescriptor atom_space(int n_atoms) {
    return SpaceDescriptor(n_atoms, 0, 1);
}

class StateVector {
   public:
    StateVector(SpaceDescriptor space, Vector amplitudes)
        : space_(space), amplitudes_(std::move(amplitudes)) {
        if (static_cast<std::size_t>(amplitudes_.size()) != space_.dimension()) {
            throw ArgumentError(
                "amplitude count " + std::to_string(amplitudes_.size()) + " does not match dimension " +
                std::to_string(space_.dimension()));
        }
    }

    static StateVector zero(const SpaceDescriptor &space) {
        return StateVector(space, Vector::Zero(static_cast<Eigen::Index>(space.dimension())));
    }

    static StateVector basis(const SpaceDescriptor &space, std::size_t index) {
        StateVector s = zero(space);
        if (index >= space.dimension()) throw ArgumentError("basis index out of range");
        s.amplitudes_[static_cast<Eigen::Index>(index)] = 1.0;
        return s;
    }

    static StateVector basis(const SpaceDescriptor &space, std::string_view label) {
        return basis(space, space.index_of_string(label));
    }

    const SpaceDescriptor &space() const { return space_; }
    const Vector &amplitudes() const { return amplitudes_; }
    cplx operator[](std::size_t i) const { return amplitudes_[static_cast<Eigen::Index>(i)]; }
    cplx amplitude(std::string_view label) const { return (*this)[space_.index_of_string(label)]; }

    double norm2() const { return amplitudes_.squaredNorm(); }
    double norm() const { return amplitudes_.norm(); }

    StateVector normalized() const {
        double n = norm();
        if (!(n > 0.0) || !std::isfinite(n)) {
            throw NumericError("cannot normalize a zero or non-finite state");
        }
        return StateVector(space_, amplitudes_ / n);
    }

    cplx inner(const StateVector &other) const {
        require_same_space(other);
        return amplitudes_.dot(other.amplitudes_);
    }

    StateVector operator*(cplx s) const { return StateVector(space_, amplitudes_ * s); }
    StateVector operator+(const StateVector &o) const {
        require_same_space(o);
        return StateVector(space_, amplitudes_ + o.amplitudes_);
    }
    StateVector operator-(const StateVector &o) const {
        require_same_space(o);
        return StateVector(space_, amplitudes_ - o.amplitudes_);
    }

    bool all_finite() const { return amplitudes_.allFinite(); }

   private:
    void require_same_space(const StateVector &o) const {
        if (!(space_ == o.space_)) throw ArgumentError("states live on different spaces");
    }

    SpaceDescriptor space_;
    Vector amplitudes_;
};

class LinearOperator {
   public:
    LinearOperator(SpaceDescriptor space, SparseMatrix matrix) : space_(space), matrix_(std::move(matrix)) {
        auto d = static_cast<Eigen::Index>(space_.dimension());
        if (matrix_.rows() != d || matrix_.cols() != d) {
            throw ArgumentError("operator shape does not match the space dimension");
        }
        matrix_.makeCompressed();
    }

    static LinearOperator zero(const SpaceDescriptor &space) {
        auto d = static_cast<Eigen::Index>(space.dimension());
        return LinearOperator(space, SparseMatrix(d, d));
    }

    static LinearOperator identity(const SpaceDescriptor &space) {
        auto d = static_cast<Eigen::Index>(space.dimension());
        SparseMatrix m(d, d);
        m.setIdentity();
        return LinearOperator(space, std::move(m));
    }

    const SpaceDescriptor &space() const { return space_; }
    const SparseMatrix &matrix() const { return matrix_; }

    StateVector apply(const StateVector &state) const {
        if (!(state.space() == space_)) throw ArgumentError("operator and state live on different spaces");
        return StateVector(space_, matrix_ * state.amplitudes());
    }
    StateVector operator*(const StateVector &state) const { return apply(state); }

    LinearOperator adjoint() const { return LinearOperator(space_, SparseMatrix(matrix_.adjoint())); }

    LinearOperator operator+(const LinearOperator &o) const {
        require_same_space(o);
        return LinearOperator(space_, matrix_ + o.matrix_);
    }
    LinearOperator operator-(const LinearOperator &o) const {
        require_same_space(o);
        return LinearOperator(space_, matrix_ - o.matrix_);
    }
    LinearOperator operator*(const LinearOperator &o) const {
        require_same_space(o);
        return LinearOperator(space_, SparseMatrix(matrix_ * o.matrix_));
    }
    LinearOperator operator*(cplx s) const { return LinearOperator(space_, matrix_ * s); }
    friend LinearOperator operator*(cplx s, const LinearOperator &op) { return op * s; }

    double max_abs_entry() const {
        double m = 0.0;
        for (Eigen::Index k = 0; k < matrix_.outerSize(); ++k) {
            for (SparseMatrix::InnerIterator it(matrix_, k); it; ++it) {
                m = std::max(m, std::abs(it.value()));
            }
        }
        return m;
    }

    /// Maximum absolute column sum.
    double one_norm() const {
        double best = 0.0;
        for (Eigen::Index k = 0; k < matrix_.outerSize(); ++k) {
            double col = 0.0;
            for (SparseMatrix::InnerIterator it(matrix_, k); it; ++it) col += std::abs(it.value());
            best = std::max(best, col);
        }
        return best;
    }

    DenseMatrix dense() const { return DenseMatrix(matrix_); }

   private:
    void require_same_space(const LinearOperator &o) const {
        if (!(space_ == o.space_)) throw ArgumentError("operators live on different spaces");
    }

    SpaceDescriptor space_;
    SparseMatrix matrix_;
};

inline LinearOperator commutator(const LinearOperator &a, const LinearOperator &b) {
    return a * b - b * a;
}

inline LinearOperator mode_annihilator(const SpaceDescriptor &space, int mode) {
    std::size_t stride = space.mode_stride(mode);
    std::vector<Eigen::Triplet<cplx>> t;
    for (std::size_t i = 0; i < space.dimension(); ++i) {
        int n = space.photons(i, mode);
        if (n > 0) {
            t.emplace_back(static_cast<int>(i - stride), static_cast<int>(i), std::sqrt(static_cast<double>(n)));
        }
    }
    auto d = static_cast<Eigen::Index>(space.dimension());
    SparseMatrix m(d, d);
    m.setFromTriplets(t.begin(), t.end());
    return LinearOperator(space, std::move(m));
}

inline LinearOperator mode_annihilator(const SpaceDescriptor &space, std::string_view mode) {
    return mode_annihilator(space, space.mode_index(mode));
}

inline LinearOperator number_operator(const SpaceDescriptor &space, int mode) {
    auto a = mode_annihilator(space, mode);
    return a.adjoint() * a;
}

/// Sum of a†a over every mode.
inline LinearOperator total_number_operator(const SpaceDescriptor &space) {
    auto d = static_cast<Eigen::Index>(space.dimension());
    std::vector<Eigen::Triplet<cplx>> t;
    for (std::size_t i = 0; i < space.dimension(); ++i) {
        int n = space.total_photons(i);
        if (n) t.emplace_back(static_cast<int>(i), static_cast<int>(i), static_cast<double>(n));
    }
    SparseMatrix m(d, d);
    m.setFromTriplets(t.begin(), t.end());
    return LinearOperator(space, std::move(m));
}

/// |to><from| on one atom, identity on every other factor.
inline LinearOperator atom_transition(const SpaceDescriptor &space, int atom, Level from, Level to) {
    std::size_t stride = space.atom_stride(atom);
    std::vector<Eigen::Triplet<cplx>> t;
    for (std::size_t i = 0; i < space.dimension(); ++i) {
        if (space.level(i, atom) == from) {
            std::size_t j = i - stride * static_cast<std::size_t>(from) + stride * static_cast<std::size_t>(to);
            t.emplace_back(static_cast<int>(j), static_cast<int>(i), 1.0);
        }
    }
    auto d = static_cast<Eigen::Index>(space.dimension());
    SparseMatrix m(d, d);
    m.setFromTriplets(t.begin(), t.end());
    return LinearOperator(space, std::move(m));
}

/// Embeds a 4x4 operator on one atom's levels (rows/cols ordered gH,gV,sH,sV).
inline LinearOperator atom_operator(const SpaceDescriptor &space, int atom, const Eigen::Matrix4cd &local) {
    std::size_t stride = space.atom_stride(atom);
    std::vector<Eigen::Triplet<cplx>> t;
    for (std::size_t i = 0; i < space.dimension(); ++i) {
        auto from = static_cast<std::size_t>(space.level(i, atom));
        std::size_t base = i - stride * from;
        for (std::size_t to = 0; to < 4; ++to) {
            cplx v = local(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from));
            if (v != cplx{}) {
                t.emplace_back(static_cast<int>(base + stride * to), static_cast<int>(i), v);
            }
        }
    }
    auto d = static_cast<Eigen::Index>(space.dimension());
    SparseMatrix m(d, d);
    m.setFromTriplets(t.begin(), t.end());
    return LinearOperator(space, std::move(m));
}

/// Joins two single-system states (atom 1 with cavity 1, atom 2 with cavity 2)
/// into the joint space, re-ordering amplitudes into the atom-major basis.
inline StateVector tensor(const StateVector &left, const StateVector &right) {
    const auto &ls = left.space();
    const auto &rs = right.space();
    if (ls.n_atoms() != 1 || rs.n_atoms() != 1) {
        throw ArgumentError("tensor expects two single-atom systems");
    }
    if (ls.n_modes() != rs.n_modes() || ls.fock_cutoff() != rs.fock_cutoff()) {
        throw ArgumentError("tensor factors have mismatched mode count or fock cutoff");
    }
    SpaceDescriptor joint(2, 2 * ls.n_modes(), ls.fock_cutoff());
    Vector out = Vector::Zero(static_cast<Eigen::Index>(joint.dimension()));
    BasisLabel jl;
    jl.levels.resize(2);
    jl.photons.resize(static_cast<std::size_t>(joint.n_modes()));
    for (std::size_t i = 0; i < ls.dimension(); ++i) {
        cplx li = left[i];
        if (li == cplx{}) continue;
        BasisLabel l = ls.label_of(i);
        for (std::size_t j = 0; j < rs.dimension(); ++j) {
            cplx rj = right[j];
            if (rj == cplx{}) continue;
            BasisLabel r = rs.label_of(j);
            jl.levels[0] = l.levels[0];
            jl.levels[1] = r.levels[0];
            for (std::size_t m = 0; m < l.photons.size(); ++m) {
                jl.photons[m] = l.photons[m];
                jl.photons[m + l.photons.size()] = r.photons[m];
            }
            out[static_cast<Eigen::Index>(joint.index_of(jl))] = li * rj;
        }
    }
    return StateVector(joint, std::move(out));
}

/// |<a|b>|^2 / (|a|^2 |b|^2).
inline double fidelity(const StateVector &a, const StateVector &b) {
    double na = a.norm2();
    double nb = b.norm2();
    if (!(na > 0.0) || !(nb > 0.0)) {
        throw ArgumentError("fidelity of a zero vector is undefined");
    }
    double f = std::norm(a.inner(b)) / (na * nb);
    return std::clamp(f, 0.0, 1.0);
}

/// Total squared amplitude on basis states where some mode sits at the cutoff.
/// Only meaningful for fock_cutoff >= 2.
inline double boundary_weight(const StateVector &state) {
    const auto &s = state.space();
    double w = 0.0;
    for (std::size_t i = 0; i < s.dimension(); ++i) {
        for (int m = 0; m < s.n_modes(); ++m) {
            if (s.photons(i, m) == s.fock_cutoff()) {
                w += std::norm(state[i]);
                break;
            }
        }
    }
    return w;
}

/// Projects the modes onto vacuum and returns the atom-only state (unnormalized).
inline StateVector project_vacuum(const StateVector &state) {
    const auto &s = state.space();
    SpaceDescriptor atoms = atom_space(s.n_atoms());
    Vector out = Vector::Zero(static_cast<Eigen::Index>(atoms.dimension()));
    BasisLabel al;
    for (std::size_t i = 0; i < s.dimension(); ++i) {
        if (s.total_photons(i) != 0) continue;
        al.levels.clear();
        for (int a = 1; a <= s.n_atoms(); ++a) al.levels.push_back(s.level(i, a));
        out[static_cast<Eigen::Index>(atoms.index_of(al))] += state[i];
    }
    return StateVector(atoms, std::move(out));
}

/// Set of basis states closed under a family of operators, used to run the
/// dynamics on the (small) part of the space a protocol can actually reach.
class Subspace {
   public:
    Subspace(SpaceDescriptor space, std::vector<std::size_t> indices) : space_(space), indices_(std::move(indices)) {
        std::sort(indices_.begin(), indices_.end());
        indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
        for (std::size_t k = 0; k < indices_.size(); ++k) position_[indices_[k]] = k;
    }

    /// Closure of `seeds` under the column structure of every operator.
    static Subspace reachable(const SpaceDescriptor &space, std::vector<std::size_t> seeds,
                              std::span<const LinearOperator *const> operators) {
        std::vector<char> seen(space.dimension(), 0);
        std::vector<std::size_t> frontier;
        for (auto s : seeds) {
            if (!seen[s]) {
                seen[s] = 1;
                frontier.push_back(s);
            }
        }
        std::vector<std::size_t> all = frontier;
        while (!frontier.empty()) {
            std::size_t col = frontier.back();
            frontier.pop_back();
            for (const LinearOperator *op : operators) {
                const SparseMatrix &m = op->matrix();
                for (SparseMatrix::InnerIterator it(m, static_cast<Eigen::Index>(col)); it; ++it) {
                    auto row = static_cast<std::size_t>(it.row());
                    if (it.value() != cplx{} && !seen[row]) {
                        seen[row] = 1;
                        frontier.push_back(row);
                        all.push_back(row);
                    }
                }
            }
        }
        return Subspace(space, std::move(all));
    }

    static std::vector<std::size_t> support(const StateVector &state) {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < state.space().dimension(); ++i) {
            if (state[i] != cplx{}) out.push_back(i);
        }
        return out;
    }

    const SpaceDescriptor &space() const { return space_; }
    std::size_t size() const { return indices_.size(); }
    const std::vector<std::size_t> &indices() const { return indices_; }

    Vector restrict(const StateVector &state) const {
        Vector v(static_cast<Eigen::Index>(indices_.size()));
        for (std::size_t k = 0; k < indices_.size(); ++k) v[static_cast<Eigen::Index>(k)] = state[indices_[k]];
        return v;
    }

    SparseMatrix restrict(const LinearOperator &op) const {
        std::vector<Eigen::Triplet<cplx>> t;
        const SparseMatrix &m = op.matrix();
        for (std::size_t k = 0; k < indices_.size(); ++k) {
            for (SparseMatrix::InnerIterator it(m, static_cast<Eigen::Index>(indices_[k])); it; ++it) {
                auto found = position_.find(static_cast<std::size_t>(it.row()));
                if (found != position_.end()) {
                    t.emplace_back(static_cast<int>(found->second), static_cast<int>(k), it.value());
                }
            }
        }
        auto n = static_cast<Eigen::Index>(indices_.size());
        SparseMatrix out(n, n);
        out.setFromTriplets(t.begin(), t.end());
        out.makeCompressed();
        return out;
    }

    StateVector embed(const Vector &v) const {
        Vector full = Vector::Zero(static_cast<Eigen::Index>(space_.dimension()));
        for (std::size_t k = 0; k < indices_.size(); ++k) {
            full[static_cast<Eigen::Index>(indices_[k])] = v[static_cast<Eigen::Index>(k)];
        }
        return StateVector(space_, std::move(full));
    }

    DenseMatrix embed(const DenseMatrix &m) const {
        auto d = static_cast<Eigen::Index>(space_.dimension());
        DenseMatrix full = DenseMatrix::Zero(d, d);
        for (std::size_t r = 0; r < indices_.size(); ++r) {
            for (std::size_t c = 0; c < indices_.size(); ++c) {
                full(static_cast<Eigen::Index>(indices_[r]), static_cast<Eigen::Index>(indices_[c])) =
                    m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
            }
        }
        return full;
    }

   private:
    SpaceDescriptor space_;
    std::vector<std::size_t> indices_;
    std::unordered_map<std::size_t, std::size_t> position_;
};

}  // namespace hcz
