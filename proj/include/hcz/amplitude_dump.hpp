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

// JSON-lines amplitude dumps. First line is a header describing the basis,
// then one {basis_label, re, im} record per nonzero amplitude in basis order.

#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "hcz/hilbert.hpp"
#include "json.hpp"

namespace hcz {

inline void write_amplitude_dump(std::ostream &out, const StateVector &state) {
    const auto &s = state.space();
    nlohmann::ordered_json header;
    header["record"] = "header";
    header["basis_ordering"] = s.ordering_description();
    header["n_atoms"] = s.n_atoms();
    nlohmann::json modes = nlohmann::json::array();
    for (int m = 0; m < s.n_modes(); ++m) modes.push_back(std::string(s.mode_name(m)));
    header["modes"] = modes;
    header["fock_cutoff"] = s.fock_cutoff();
    header["dimension"] = s.dimension();
    out << header.dump() << '\n';
    for (std::size_t i = 0; i < s.dimension(); ++i) {
        cplx v = state[i];
        if (v == cplx{}) continue;
        nlohmann::ordered_json rec;
        rec["basis_label"] = s.label_string(i);
        rec["re"] = v.real();
        rec["im"] = v.imag();
        out << rec.dump() << '\n';
    }
}

inline StateVector read_amplitude_dump(std::istream &in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("missing header record", 1, 1);
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error &e) {
        throw ParseError(e.what(), 1, 1);
    }
    if (header.value("record", "") != "header") throw ParseError("first record is not a header", 1, 1);
    SpaceDescriptor space(header.at("n_atoms").get<int>(), static_cast<int>(header.at("modes").size()),
                          header.at("fock_cutoff").get<int>());
    Vector amps = Vector::Zero(static_cast<Eigen::Index>(space.dimension()));
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            auto rec = nlohmann::json::parse(line);
            std::size_t idx = space.index_of_string(rec.at("basis_label").get<std::string>());
            amps[static_cast<Eigen::Index>(idx)] = cplx(rec.at("re").get<double>(), rec.at("im").get<double>());
        } catch (const std::exception &e) {
            throw ParseError(e.what(), line_no, 1);
        }
    }
    return StateVector(space, std::move(amps));
}

}  // namespace hcz
