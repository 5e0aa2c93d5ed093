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

// Linear-optics network from the two cavity outputs to four detectors.
//
// A network is a list of elements acting on four rails. Rails start out named
// a1H, a1V, a2H, a2V. Each element consumes named rails and, by default,
// writes its outputs back to the same rails; `->` renames the outputs, which
// is how a PBS routes polarizations into new spatial ports. Output k of an
// element occupies the rail of input k.
//
// Netlist text format, one element per line, `#` starts a comment:
//
//   phase <port> <angle>
//   qwp   <portH>,<portV> <angle>             fast axis angle from H
//   pbs   <portH>,<portV> -> <out1>,<out2>    split one beam by polarization
//   pbs   <xH>,<xV>,<yH>,<yV> -> <AH>,<AV>,<BH>,<BV>
//                                             combine two beams: A = (xH, yV),
//                                             B = (yH, xV)
//
// Angles are decimal numbers or multiples of pi (`pi/4`, `-pi/2`, `3*pi/4`).

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hcz/errors.hpp"
#include "hcz/hilbert.hpp"
#include "json.hpp"

namespace hcz {

enum class ElementKind { pbs, qwp, phase };

inline std::string_view element_kind_name(ElementKind k) {
    switch (k) {
        case ElementKind::pbs:
            return "pbs";
        case ElementKind::qwp:
            return "qwp";
        case ElementKind::phase:
            return "phase";
    }
    return "?";
}

struct NetworkElement {
    ElementKind kind = ElementKind::phase;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;  // empty: same names as inputs
    double parameter = 0.0;
    int line = 0;  // source line when parsed from text, 0 otherwise
};

inline const std::array<std::string, 4> kCavityModes{"a1H", "a1V", "a2H", "a2V"};
inline const std::array<std::string, 4> kDetectorModes{"b1", "b2", "b3", "b4"};

struct ModeTransform {
    Eigen::Matrix4cd matrix = Eigen::Matrix4cd::Identity();
    std::array<std::string, 4> input_modes = kCavityModes;
    std::array<std::string, 4> output_modes = kCavityModes;

    double unitarity_residual() const {
        return (matrix * matrix.adjoint() - Eigen::Matrix4cd::Identity()).cwiseAbs().maxCoeff();
    }
};

/// Jones matrix of a quarter-wave plate with fast axis at `theta` from H.
inline Eigen::Matrix2cd qwp_matrix(double theta) {
    Eigen::Matrix2cd r;
    r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    Eigen::Matrix2cd retarder = Eigen::Matrix2cd::Zero();
    retarder(0, 0) = 1.0;
    retarder(1, 1) = kI;
    return r * retarder * r.transpose();
}

/// Local matrix of an element; row k is output k in terms of the inputs.
inline Eigen::MatrixXcd element_matrix(const NetworkElement &e) {
    auto where = [&] { return e.line ? " (line " + std::to_string(e.line) + ")" : std::string(); };
    switch (e.kind) {
        case ElementKind::phase: {
            if (e.inputs.size() != 1) throw TopologyError("phase takes exactly one port" + where());
            Eigen::MatrixXcd m(1, 1);
            m(0, 0) = std::exp(kI * e.parameter);
            return m;
        }
        case ElementKind::qwp: {
            if (e.inputs.size() != 2) throw TopologyError("qwp takes two ports (H,V)" + where());
            return qwp_matrix(e.parameter);
        }
        case ElementKind::pbs: {
            if (e.inputs.size() == 2) return Eigen::MatrixXcd::Identity(2, 2);
            if (e.inputs.size() != 4) throw TopologyError("pbs takes two or four ports" + where());
            Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
            m(0, 0) = 1.0;  // AH <- xH
            m(1, 3) = 1.0;  // AV <- yV
            m(2, 2) = 1.0;  // BH <- yH
            m(3, 1) = 1.0;  // BV <- xV
            return m;
        }
    }
    throw TopologyError("unknown element kind");
}

inline ModeTransform compose_network(const std::vector<NetworkElement> &elements) {
    ModeTransform out;
    std::array<std::string, 4> rails = kCavityModes;
    auto rail_of = [&](const std::string &name) -> std::optional<std::size_t> {
        for (std::size_t r = 0; r < 4; ++r) {
            if (rails[r] == name) return r;
        }
        return std::nullopt;
    };
    for (const auto &e : elements) {
        auto where = e.line ? " (line " + std::to_string(e.line) + ")" : std::string();
        Eigen::MatrixXcd local = element_matrix(e);
        double residual =
            (local * local.adjoint() - Eigen::MatrixXcd::Identity(local.rows(), local.cols())).cwiseAbs().maxCoeff();
        if (!(residual <= 1e-12)) {
            throw CalibrationError(std::string(element_kind_name(e.kind)) + " element is not unitary" + where);
        }
        std::vector<std::size_t> slots;
        for (const auto &port : e.inputs) {
            auto r = rail_of(port);
            if (!r) throw TopologyError("dangling port '" + port + "'" + where + ": not a live mode");
            if (std::find(slots.begin(), slots.end(), *r) != slots.end()) {
                throw TopologyError("port '" + port + "' consumed twice" + where);
            }
            slots.push_back(*r);
        }
        const auto &outputs = e.outputs.empty() ? e.inputs : e.outputs;
        if (outputs.size() != e.inputs.size()) {
            throw TopologyError(std::string(element_kind_name(e.kind)) + " has " + std::to_string(e.inputs.size()) +
                                " inputs but " + std::to_string(outputs.size()) + " outputs" + where);
        }
        Eigen::Matrix4cd embedded = Eigen::Matrix4cd::Identity();
        for (std::size_t k = 0; k < slots.size(); ++k) {
            for (std::size_t m = 0; m < slots.size(); ++m) {
                embedded(static_cast<Eigen::Index>(slots[k]), static_cast<Eigen::Index>(slots[m])) =
                    local(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m));
            }
        }
        out.matrix = embedded * out.matrix;
        for (std::size_t k = 0; k < slots.size(); ++k) rails[slots[k]] = "";
        for (std::size_t k = 0; k < slots.size(); ++k) {
            if (rail_of(outputs[k])) throw TopologyError("port '" + outputs[k] + "' produced twice" + where);
            rails[slots[k]] = outputs[k];
        }
    }
    // Detector outputs are reported in b1..b4 order regardless of rail.
    std::array<std::string, 4> sorted = rails;
    std::sort(sorted.begin(), sorted.end());
    if (sorted == kDetectorModes) {
        Eigen::Matrix4cd reordered;
        for (std::size_t j = 0; j < 4; ++j) {
            auto r = *rail_of(kDetectorModes[j]);
            reordered.row(static_cast<Eigen::Index>(j)) = out.matrix.row(static_cast<Eigen::Index>(r));
        }
        out.matrix = reordered;
        out.output_modes = kDetectorModes;
    } else {
        out.output_modes = rails;
    }
    return out;
}

/// Detector modes b1..b4 in terms of (a1H, a1V, a2H, a2V).
inline ModeTransform paper_network() {
    const double h = 0.5;
    const double r = 1.0 / std::sqrt(2.0);
    ModeTransform t;
    t.matrix << h, h, 0, r,    //
        h, h, 0, -r,           //
        h, -h, r, 0,           //
        -h, h, r, 0;
    t.output_modes = kDetectorModes;
    return t;
}

namespace detail {

inline std::optional<double> parse_number(std::string_view s) {
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace detail

/// Decimal number, or [sign][k*]pi[/d].
inline std::optional<double> parse_angle(std::string_view text) {
    auto pos = text.find("pi");
    if (pos == std::string_view::npos) return detail::parse_number(text);
    std::string_view head = text.substr(0, pos);
    std::string_view tail = text.substr(pos + 2);
    double sign = 1.0;
    if (!head.empty() && (head.front() == '-' || head.front() == '+')) {
        sign = head.front() == '-' ? -1.0 : 1.0;
        head.remove_prefix(1);
    }
    double coef = 1.0;
    if (!head.empty()) {
        if (head.back() != '*') return std::nullopt;
        auto c = detail::parse_number(head.substr(0, head.size() - 1));
        if (!c) return std::nullopt;
        coef = *c;
    }
    double denom = 1.0;
    if (!tail.empty()) {
        if (tail.front() != '/') return std::nullopt;
        auto d = detail::parse_number(tail.substr(1));
        if (!d || *d == 0.0) return std::nullopt;
        denom = *d;
    }
    return sign * coef * std::numbers::pi / denom;
}

inline std::vector<NetworkElement> parse_netlist(std::string_view text) {
    std::vector<NetworkElement> out;
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        ++line_no;
        start = end + 1;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

        struct Token {
            std::string_view text;
            int column;
        };
        std::vector<Token> tokens;
        for (std::size_t i = 0; i < line.size();) {
            if (std::isspace(static_cast<unsigned char>(line[i]))) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
            tokens.push_back({line.substr(i, j - i), static_cast<int>(i) + 1});
            i = j;
        }
        if (tokens.empty()) continue;

        NetworkElement e;
        e.line = line_no;
        auto kind = tokens[0].text;
        if (kind == "pbs") {
            e.kind = ElementKind::pbs;
        } else if (kind == "qwp") {
            e.kind = ElementKind::qwp;
        } else if (kind == "phase") {
            e.kind = ElementKind::phase;
        } else {
            throw ParseError("unknown element kind '" + std::string(kind) + "'", line_no, tokens[0].column);
        }
        auto split_ports = [&](const Token &tok) {
            std::vector<std::string> ports;
            std::size_t s = 0;
            while (s <= tok.text.size()) {
                auto c = tok.text.find(',', s);
                if (c == std::string_view::npos) c = tok.text.size();
                auto p = tok.text.substr(s, c - s);
                if (p.empty()) throw ParseError("empty port name", line_no, tok.column + static_cast<int>(s));
                ports.emplace_back(p);
                s = c + 1;
            }
            return ports;
        };
        std::size_t k = 1;
        if (k >= tokens.size()) throw ParseError("missing port list", line_no, static_cast<int>(line.size()) + 1);
        e.inputs = split_ports(tokens[k++]);
        if (k < tokens.size() && tokens[k].text == "->") {
            ++k;
            if (k >= tokens.size()) throw ParseError("missing output ports after '->'", line_no, tokens[k - 1].column);
            e.outputs = split_ports(tokens[k++]);
        }
        bool needs_angle = e.kind != ElementKind::pbs;
        if (needs_angle) {
            if (k >= tokens.size()) {
                throw ParseError(std::string(kind) + " needs an angle parameter", line_no,
                                 static_cast<int>(line.size()) + 1);
            }
            auto angle = parse_angle(tokens[k].text);
            if (!angle) throw ParseError("bad angle '" + std::string(tokens[k].text) + "'", line_no, tokens[k].column);
            e.parameter = *angle;
            ++k;
        }
        if (k < tokens.size()) {
            throw ParseError("unexpected token '" + std::string(tokens[k].text) + "'", line_no, tokens[k].column);
        }
        out.push_back(std::move(e));
    }
    return out;
}

/// Canonical element list for the two-cavity setup. Each quarter-wave plate
/// sits at pi/4 and is dressed with fixed phase retarders so that the stage
/// acts as a real 50:50 polarization rotation (H+V, H-V)/sqrt(2).
inline constexpr std::string_view kPaperNetlist = R"(# cavity 1 beam: QWP stage before the central PBS
phase a1V pi/2
qwp   a1H,a1V pi/4
phase a1V pi/2
phase a1H -pi/4
phase a1V -pi/4
# central PBS: port A = (cavity-1 H, cavity-2 V), port B = (cavity-2 H, cavity-1 V)
pbs   a1H,a1V,a2H,a2V -> AH,AV,BH,BV
# port A: QWP stage, PBS onto D1/D2
phase AV pi/2
qwp   AH,AV pi/4
phase AV pi/2
phase AH -pi/4
phase AV -pi/4
pbs   AH,AV -> b1,b2
# port B: QWP stage, PBS onto D3/D4
phase BV pi/2
qwp   BH,BV pi/4
phase BV pi/2
phase BH -pi/4
phase BV -pi/4
pbs   BH,BV -> b3,b4
)";

inline ModeTransform calibrated_network() {
    return compose_network(parse_netlist(kPaperNetlist));
}

/// b_j = sum_m B[j,m] exp(-i phi_cavity(m)) a_m on the joint space.
inline std::array<LinearOperator, 4> jump_operators(const ModeTransform &transform, const SpaceDescriptor &space,
                                                    std::pair<double, double> phases) {
    if (space.n_atoms() != 2 || space.n_modes() != 4) {
        throw ArgumentError("jump_operators needs the joint two-system space");
    }
    double residual = transform.unitarity_residual();
    if (!(residual <= 1e-9)) {
        throw CalibrationError("mode transform is not unitary (residual " + std::to_string(residual) + ")");
    }
    std::array<LinearOperator, 4> a{mode_annihilator(space, 0), mode_annihilator(space, 1), mode_annihilator(space, 2),
                                    mode_annihilator(space, 3)};
    std::array<cplx, 2> phase{std::exp(-kI * phases.first), std::exp(-kI * phases.second)};
    auto make = [&](int j) {
        LinearOperator b = LinearOperator::zero(space);
        for (int m = 0; m < 4; ++m) {
            cplx c = transform.matrix(j, m) * phase[static_cast<std::size_t>(SpaceDescriptor::cavity_of_mode(m) - 1)];
            if (c != cplx{}) b = b + a[static_cast<std::size_t>(m)] * c;
        }
        return b;
    };
    return {make(0), make(1), make(2), make(3)};
}

/// 4x4 matrix as nested JSON arrays of [re, im] pairs, row-major.
inline nlohmann::json transform_to_json(const ModeTransform &t) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < 4; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < 4; ++c) row.push_back({t.matrix(r, c).real(), t.matrix(r, c).imag()});
        rows.push_back(row);
    }
    return rows;
}

inline ModeTransform transform_from_json(const nlohmann::json &j) {
    ModeTransform t;
    if (!j.is_array() || j.size() != 4) throw ArgumentError("transform JSON must be a 4x4 array");
    for (std::size_t r = 0; r < 4; ++r) {
        if (!j[r].is_array() || j[r].size() != 4) throw ArgumentError("transform JSON must be a 4x4 array");
        for (std::size_t c = 0; c < 4; ++c) {
            t.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                cplx(j[r][c].at(0).get<double>(), j[r][c].at(1).get<double>());
        }
    }
    t.output_modes = kDetectorModes;
    return t;
}

}  // namespace hcz
