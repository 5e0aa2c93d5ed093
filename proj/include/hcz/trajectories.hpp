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

// Quantum-jump unraveling of the two protocol steps.
//
// Between jumps the state follows exp(-i G t) with G the no-jump generator of
// the current step; the survival S(t) = ||psi(t)||^2 is tabulated on 1024
// uniform knots per step window and interpolated with a monotone cubic. A jump
// time is drawn by inverse transform (S(t) = 1 - u) and refined by bisection
// on the exact propagator to 1e-10. The detector is drawn with weights
// ||b_j psi||^2 and the post-jump state is b_j psi renormalized.
//
// All work runs on the subspace reachable from the initial state, which for
// the protocol is 36-dimensional independent of the Fock cutoff.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hcz/dynamics.hpp"
#include "hcz/errors.hpp"
#include "hcz/hilbert.hpp"
#include "hcz/matrix_exp.hpp"
#include "hcz/optics.hpp"
#include "hcz/parallel.hpp"
#include "hcz/protocol.hpp"
#include "json.hpp"

namespace hcz {

using Rng = std::mt19937_64;

/// Independent stream for one trajectory; depends only on the seed.
inline Rng trajectory_rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xFFFFFFFFu), static_cast<std::uint32_t>(seed >> 32)};
    return Rng(seq);
}

/// Uniform on (0, 1].
inline double uniform01(Rng &rng) {
    return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

/// Fritsch-Carlson monotone cubic Hermite interpolant.
class MonotoneCubic {
   public:
    MonotoneCubic() = default;

    MonotoneCubic(const std::vector<double> &x, const std::vector<double> &y) { assign(x, y); }

    void assign(const std::vector<double> &x, const std::vector<double> &y) {
        x_.assign(x.begin(), x.end());
        y_.assign(y.begin(), y.end());
        std::size_t n = x_.size();
        if (n != y_.size() || n == 0) throw ArgumentError("interpolant needs matching, non-empty knots");
        m_.assign(n, 0.0);
        if (n == 1) return;
        d_.resize(n - 1);
        auto &d = d_;
        for (std::size_t k = 0; k + 1 < n; ++k) d[k] = (y_[k + 1] - y_[k]) / (x_[k + 1] - x_[k]);
        m_[0] = d[0];
        m_[n - 1] = d[n - 2];
        for (std::size_t k = 1; k + 1 < n; ++k) m_[k] = d[k - 1] * d[k] <= 0.0 ? 0.0 : (d[k - 1] + d[k]) / 2.0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            if (d[k] == 0.0) {
                m_[k] = m_[k + 1] = 0.0;
                continue;
            }
            double a = m_[k] / d[k];
            double b = m_[k + 1] / d[k];
            double r = a * a + b * b;
            if (r > 9.0) {
                double t = 3.0 / std::sqrt(r);
                m_[k] = t * a * d[k];
                m_[k + 1] = t * b * d[k];
            }
        }
    }

    double operator()(double t) const {
        if (x_.size() == 1) return y_[0];
        std::size_t k = interval(t);
        double h = x_[k + 1] - x_[k];
        double s = (t - x_[k]) / h;
        double s2 = s * s;
        double s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * y_[k] + (s3 - 2 * s2 + s) * h * m_[k] + (-2 * s3 + 3 * s2) * y_[k + 1] +
               (s3 - s2) * h * m_[k + 1];
    }

    std::size_t interval(double t) const {
        auto it = std::upper_bound(x_.begin(), x_.end(), t);
        std::size_t k = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
        return std::min(k, x_.size() - 2);
    }

   private:
    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> m_;
    std::vector<double> d_;
};

/// No-jump evolution from one starting point to the end of a step window.
struct Segment {
    std::vector<double> times;  // start time, then every knot after it
    DenseMatrix states;         // one column per entry of `times`
    std::vector<double> survival;
    MonotoneCubic curve;

    double end_survival() const { return survival.back(); }
    Vector end_state() const { return states.col(states.cols() - 1); }
};

/// Knot grid and one-knot propagator for a fixed generator on [0, window].
class SegmentPropagator {
   public:
    static constexpr int kKnots = 1024;

    SegmentPropagator() = default;

    SegmentPropagator(SparseMatrix generator, double window) : g_(std::move(generator)), window_(window) {
        if (window_ < 0.0) throw ArgumentError("window must be >= 0");
        h_ = window_ / (kKnots - 1);
        diagonal_ = true;
        for (int c = 0; c < g_.outerSize() && diagonal_; ++c) {
            for (SparseMatrix::InnerIterator it(g_, c); it; ++it) {
                if (it.row() != it.col() && it.value() != cplx(0.0)) diagonal_ = false;
            }
        }
        if (diagonal_) {
            diag_ = DenseMatrix(g_).diagonal();
            step_diag_ = (diag_ * (-kI * h_)).array().exp().matrix();
        } else if (window_ > 0.0 && g_.rows() <= kMaxDenseExpDimension) {
            DenseMatrix u = expm(DenseMatrix(g_) * (-kI * h_));
            double cut = 1e-18 * u.cwiseAbs().maxCoeff();
            u_ = u.sparseView(cplx(1.0), cut);
            have_u_ = true;
        }
    }

    double window() const { return window_; }
    const SparseMatrix &generator() const { return g_; }

    double knot(int k) const { return k == kKnots - 1 ? window_ : k * h_; }

    Vector evolve(const Vector &psi, double dt) const {
        if (diagonal_) return psi.cwiseProduct((diag_ * (-kI * dt)).array().exp().matrix());
        return taylor_propagate(g_, psi, dt);
    }

    Segment start(double t0, const Vector &psi0) const {
        Segment seg;
        start_into(seg, t0, psi0);
        return seg;
    }

    /// Like start() but reuses the storage of `seg`.
    void start_into(Segment &seg, double t0, const Vector &psi0) const {
        seg.times.clear();
        seg.survival.clear();
        int k0 = kKnots;
        if (window_ > 0.0 && t0 < window_) {
            k0 = static_cast<int>(std::floor(t0 / h_)) + 1;
            while (k0 < kKnots && knot(k0) - t0 <= 1e-13 * window_) ++k0;
        }
        auto cols = static_cast<Eigen::Index>(1 + kKnots - k0);
        seg.states.resize(psi0.size(), cols);
        seg.times.reserve(static_cast<std::size_t>(cols));
        seg.survival.reserve(static_cast<std::size_t>(cols));
        seg.times.push_back(t0);
        seg.states.col(0) = psi0;
        for (int k = k0; k < kKnots; ++k) {
            auto c = static_cast<Eigen::Index>(k - k0 + 1);
            if (k == k0 || k == kKnots - 1 || !(have_u_ || diagonal_)) {
                seg.states.col(c) = evolve(seg.states.col(c - 1), knot(k) - seg.times.back());
            } else if (diagonal_) {
                seg.states.col(c) = seg.states.col(c - 1).cwiseProduct(step_diag_);
            } else {
                seg.states.col(c) = u_ * seg.states.col(c - 1);
            }
            seg.times.push_back(knot(k));
        }
        double base = psi0.squaredNorm();
        for (Eigen::Index c = 0; c < cols; ++c) {
            seg.survival.push_back(std::min(1.0, seg.states.col(c).squaredNorm() / base));
        }
        if (!seg.states.allFinite()) throw NumericError("no-jump propagation produced non-finite amplitudes");
        seg.curve.assign(seg.times, seg.survival);
    }

   private:
    SparseMatrix g_;
    double window_ = 0.0;
    double h_ = 0.0;
    SparseMatrix u_;
    bool have_u_ = false;
    bool diagonal_ = false;
    Vector diag_;
    Vector step_diag_;
};

struct JumpDraw {
    double time;   // within the segment's window
    int detector;  // 1-based index into the jump list
    Vector post;   // normalized post-jump state
};

/// Draws the next jump in `seg`, or nothing if the trajectory survives to the
/// end of the window. Consumes two uniforms when a jump happens, one otherwise.
inline std::optional<JumpDraw> draw_jump(const Segment &seg, const SegmentPropagator &prop,
                                         std::span<const SparseMatrix> jumps, Rng &rng) {
    double u = uniform01(rng);
    if (u > 1.0 - seg.end_survival()) return std::nullopt;
    double target = 1.0 - u;
    std::size_t k = 1;
    while (k < seg.survival.size() && seg.survival[k] > target) ++k;
    if (k >= seg.survival.size()) k = seg.survival.size() - 1;
    double lo = seg.times[k - 1];
    double hi = seg.times[k];
    Vector base = seg.states.col(static_cast<Eigen::Index>(k - 1));
    double norm0 = seg.states.col(0).squaredNorm();
    auto exact = [&](double t) { return prop.evolve(base, t - seg.times[k - 1]).squaredNorm() / norm0; };

    // Invert the interpolant for a first guess, then bisect on the exact curve.
    double glo = lo;
    double ghi = hi;
    for (int it = 0; it < 60 && ghi - glo > 1e-13; ++it) {
        double mid = 0.5 * (glo + ghi);
        (seg.curve(mid) > target ? glo : ghi) = mid;
    }
    double guess = 0.5 * (glo + ghi);
    if (guess > lo && guess < hi) (exact(guess) > target ? lo : hi) = guess;
    while (hi - lo > 1e-10) {
        double mid = 0.5 * (lo + hi);
        (exact(mid) > target ? lo : hi) = mid;
    }
    double t = 0.5 * (lo + hi);
    Vector psi = prop.evolve(base, t - seg.times[k - 1]);

    std::vector<double> weights;
    double total = 0.0;
    for (const auto &l : jumps) {
        weights.push_back((l * psi).squaredNorm());
        total += weights.back();
    }
    if (!(total > 0.0)) {
        throw ConsistencyError("jump drawn at t=" + std::to_string(t) + " but every jump amplitude vanishes");
    }
    double pick = uniform01(rng) * total;
    std::size_t j = 0;
    double acc = weights[0];
    while (acc < pick && j + 1 < weights.size()) acc += weights[++j];
    Vector post = jumps[j] * psi;
    post /= post.norm();
    return JumpDraw{t, static_cast<int>(j) + 1, std::move(post)};
}

struct SampledJump {
    double time;
    int detector;
    StateVector post_jump_state;
};

/// One waiting-time draw for `state` under `generator` within [0, horizon].
inline std::optional<SampledJump> sample_jump(const StateVector &state, std::span<const LinearOperator> jump_ops,
                                              const LinearOperator &generator, double horizon, Rng &rng) {
    if (std::abs(state.norm2() - 1.0) > 1e-9) throw ArgumentError("sample_jump needs a normalized state");
    std::vector<const LinearOperator *> ops{&generator};
    for (const auto &l : jump_ops) ops.push_back(&l);
    Subspace sub = Subspace::reachable(state.space(), Subspace::support(state), ops);
    std::vector<SparseMatrix> jumps;
    for (const auto &l : jump_ops) jumps.push_back(sub.restrict(l));
    SegmentPropagator prop(sub.restrict(generator), horizon);
    Segment seg = prop.start(0.0, sub.restrict(state));
    auto draw = draw_jump(seg, prop, jumps, rng);
    if (!draw) return std::nullopt;
    return SampledJump{draw->time, draw->detector, sub.embed(draw->post)};
}

struct JumpEvent {
    double time;       // from the start of step 1
    int detector;      // 1..4
    bool lost = false; // photon lost before the detector (step 2 only)
};

struct TrajectoryRecord {
    std::uint64_t seed = 0;
    std::vector<JumpEvent> events;
    bool survived_step1 = true;
    std::optional<DetectionPattern> heralded_pattern;
    StateVector final_state = StateVector::zero(atom_space(1));

    std::vector<JumpEvent> clicks() const {
        std::vector<JumpEvent> out;
        for (const auto &e : events) {
            if (!e.lost) out.push_back(e);
        }
        return out;
    }
};

struct EstimateWithError {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_samples = 0;
};

/// Bernoulli estimate: stderr = sample standard deviation / sqrt(n).
inline EstimateWithError bernoulli_estimate(std::size_t hits, std::size_t n) {
    EstimateWithError e;
    e.n_samples = n;
    if (n == 0) return e;
    e.mean = static_cast<double>(hits) / static_cast<double>(n);
    if (n > 1) {
        double var = e.mean * (1.0 - e.mean) * static_cast<double>(n) / static_cast<double>(n - 1);
        e.std_error = std::sqrt(var / static_cast<double>(n));
    }
    return e;
}

/// Precomputed model for many trajectories with the same inputs and
/// parameters. Thread-safe for concurrent run()/classify() calls.
class TrajectorySimulator {
   public:
    TrajectorySimulator(const AtomInputs &inputs, const SystemParams &params)
        : TrajectorySimulator(inputs, params, params.tau + params.t_detect) {
    }

    TrajectorySimulator(const AtomInputs &inputs, const SystemParams &params, double horizon,
                        const ModeTransform &network = paper_network())
        : inputs_(inputs), params_(params), space_(joint_space(params)), sub_(space_, {}) {
        params.validate();
        inputs.validate();
        if (!(horizon >= 0.0) || horizon > params.tau + params.t_detect + 1e-12) {
            throw ArgumentError("horizon must lie in [0, tau + t_detect]");
        }
        StateVector psi0 = prepare_inputs(inputs, space_);
        LinearOperator drive = drive_generator(space_, params.omega, params.kappa);
        LinearOperator decay = decay_generator(space_, params.kappa);
        auto b = jump_operators(network, space_, {params.phi1, params.phi2});
        std::vector<const LinearOperator *> ops{&drive, &decay, &b[0], &b[1], &b[2], &b[3]};
        sub_ = Subspace::reachable(space_, Subspace::support(psi0), ops);
        for (const auto &op : b) jumps_.push_back(sub_.restrict(op));

        double t1 = std::min(params.tau, horizon);
        double t2 = std::max(0.0, horizon - params.tau);
        step1_ = SegmentPropagator(sub_.restrict(drive), t1);
        step2_ = SegmentPropagator(sub_.restrict(decay), t2);
        first1_ = step1_.start(0.0, sub_.restrict(psi0));
        if (t2 > 0.0) {
            Vector end = first1_.end_state();
            first2_ = step2_.start(0.0, end / end.norm());
        }
    }

    const Subspace &subspace() const { return sub_; }
    const SystemParams &params() const { return params_; }
    const AtomInputs &inputs() const { return inputs_; }

    /// Protocol semantics: any step-1 emission aborts the run.
    TrajectoryRecord run(std::uint64_t seed) const {
        Path p = simulate(seed, true);
        TrajectoryRecord r;
        r.seed = seed;
        r.events = std::move(p.events);
        r.survived_step1 = p.survived_step1;
        r.heralded_pattern = classify_events(r.survived_step1, r.events);
        r.final_state = sub_.embed(p.state);
        return r;
    }

    /// Heralding outcome only; cheaper than run().
    std::optional<DetectionPattern> classify(std::uint64_t seed, bool *survived = nullptr) const {
        Path p = simulate(seed, true);
        if (survived) *survived = p.survived_step1;
        return classify_events(p.survived_step1, p.events);
    }

    /// State at the horizon with every emission kept in the unraveling
    /// (no abort), on the reduced subspace.
    Vector unconditional(std::uint64_t seed) const { return simulate(seed, false).state; }

   private:
    struct Path {
        std::vector<JumpEvent> events;
        bool survived_step1 = true;
        Vector state;
    };

    static std::optional<DetectionPattern> classify_events(bool survived, const std::vector<JumpEvent> &events) {
        if (!survived) return std::nullopt;
        DetectionPattern clicked;
        int count = 0;
        for (const auto &e : events) {
            if (e.lost) continue;
            clicked.add(e.detector);
            ++count;
        }
        if (count == 2 && is_heralding(clicked)) return clicked;
        return std::nullopt;
    }

    Path simulate(std::uint64_t seed, bool abort_on_step1) const {
        Rng rng = trajectory_rng(seed);
        Path path;
        thread_local Segment fresh;
        const Segment *seg = &first1_;
        for (;;) {
            auto jump = draw_jump(*seg, step1_, jumps_, rng);
            if (!jump) {
                Vector end = seg->end_state();
                path.state = end / end.norm();
                break;
            }
            path.events.push_back({jump->time, jump->detector, false});
            path.survived_step1 = false;
            if (abort_on_step1) {
                path.state = std::move(jump->post);
                return path;
            }
            step1_.start_into(fresh, jump->time, jump->post);
            seg = &fresh;
        }
        if (step2_.window() <= 0.0) return path;

        if (path.survived_step1) {
            seg = &first2_;
        } else {
            step2_.start_into(fresh, 0.0, path.state);
            seg = &fresh;
        }
        for (;;) {
            auto jump = draw_jump(*seg, step2_, jumps_, rng);
            if (!jump) {
                Vector end = seg->end_state();
                path.state = end / end.norm();
                break;
            }
            bool lost = uniform01(rng) <= params_.eta;
            path.events.push_back({params_.tau + jump->time, jump->detector, lost});
            step2_.start_into(fresh, jump->time, jump->post);
            seg = &fresh;
        }
        return path;
    }

    AtomInputs inputs_;
    SystemParams params_;
    SpaceDescriptor space_;
    Subspace sub_;
    std::vector<SparseMatrix> jumps_;
    SegmentPropagator step1_;
    SegmentPropagator step2_;
    Segment first1_;
    Segment first2_;
};

inline TrajectoryRecord run_trajectory(const AtomInputs &inputs, const SystemParams &params, std::uint64_t seed) {
    return TrajectorySimulator(inputs, params).run(seed);
}

/// Fraction of step-1 survivors whose step-2 clicks form a heralding pair.
/// Trajectory i uses seed base_seed + i.
inline EstimateWithError estimate_heralding(const AtomInputs &inputs, const SystemParams &params, std::size_t n,
                                            std::uint64_t base_seed, unsigned jobs = 1) {
    if (n < 100) throw ArgumentError("estimate_heralding needs n >= 100");
    TrajectorySimulator sim(inputs, params);
    std::vector<std::uint8_t> outcome(n);
    parallel_for(n, jobs, [&](std::size_t i) {
        bool survived = false;
        auto p = sim.classify(base_seed + i, &survived);
        outcome[i] = static_cast<std::uint8_t>(!survived ? 0 : (p ? 2 : 1));
    });
    std::size_t survivors = 0;
    std::size_t hits = 0;
    for (auto o : outcome) {
        survivors += o > 0;
        hits += o == 2;
    }
    return bernoulli_estimate(hits, survivors);
}

/// Average of |psi><psi| over n unconditioned trajectories at `horizon`.
inline DensityMatrix unconditional_average(const AtomInputs &inputs, const SystemParams &params, std::size_t n,
                                           double horizon, std::uint64_t base_seed, unsigned jobs = 1) {
    if (n < 1000) throw ArgumentError("unconditional_average needs n >= 1000");
    TrajectorySimulator sim(inputs, params, horizon);
    auto k = static_cast<Eigen::Index>(sim.subspace().size());
    constexpr std::size_t kBlock = 256;
    std::size_t blocks = (n + kBlock - 1) / kBlock;
    std::vector<DenseMatrix> partial(blocks, DenseMatrix::Zero(k, k));
    parallel_for(blocks, jobs, [&](std::size_t b) {
        std::size_t end = std::min(n, (b + 1) * kBlock);
        for (std::size_t i = b * kBlock; i < end; ++i) {
            Vector psi = sim.unconditional(base_seed + i);
            partial[b].noalias() += psi * psi.adjoint();
        }
    });
    DenseMatrix sum = DenseMatrix::Zero(k, k);
    for (const auto &p : partial) sum += p;
    sum /= static_cast<double>(n);
    return DensityMatrix(sim.subspace().space(), sim.subspace().embed(sum));
}

/// Corrected-state fidelity for a heralded record, nullopt otherwise.
inline std::optional<double> trajectory_fidelity(const TrajectoryRecord &r, const AtomInputs &inputs) {
    if (!r.heralded_pattern) return std::nullopt;
    StateVector atoms = project_vacuum(r.final_state).normalized();
    StateVector corrected = apply_correction(correction_unitary(*r.heralded_pattern), atoms);
    return fidelity(corrected, ideal_cz(inputs));
}

/// One JSON object per trajectory:
/// {seed, survived_step1, events:[{t, detector}], pattern, fidelity_cz}.
/// Lost photons are not clicks and are left out of `events`.
inline void write_trajectory_log_line(std::ostream &out, const TrajectoryRecord &r, const AtomInputs &inputs) {
    nlohmann::ordered_json j;
    j["seed"] = r.seed;
    j["survived_step1"] = r.survived_step1;
    nlohmann::ordered_json events = nlohmann::ordered_json::array();
    for (const auto &e : r.clicks()) {
        nlohmann::ordered_json ev;
        ev["t"] = e.time;
        ev["detector"] = "D" + std::to_string(e.detector);
        events.push_back(ev);
    }
    j["events"] = events;
    if (r.heralded_pattern) {
        j["pattern"] = r.heralded_pattern->str();
    } else {
        j["pattern"] = nullptr;
    }
    if (auto f = trajectory_fidelity(r, inputs)) {
        j["fidelity_cz"] = *f;
    } else {
        j["fidelity_cz"] = nullptr;
    }
    out << j.dump() << '\n';
}

}  // namespace hcz
