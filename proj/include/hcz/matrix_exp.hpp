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

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <string>

#include "hcz/hilbert.hpp"

namespace hcz {

/// Largest dimension for which a dense exponential is formed.
inline constexpr Eigen::Index kMaxDenseExpDimension = 300;

/// exp(m) by Pade scaling-and-squaring. Refuses dimensions above
/// kMaxDenseExpDimension; callers fall back to taylor_propagate.
inline DenseMatrix expm(const DenseMatrix &m) {
    if (m.rows() != m.cols()) throw ArgumentError("expm needs a square matrix");
    if (m.rows() > kMaxDenseExpDimension) {
        throw ArgumentError("dense matrix exponential refused for dimension " + std::to_string(m.rows()) +
                            " (limit " + std::to_string(kMaxDenseExpDimension) +
                            "); use the stepwise integrator");
    }
    if (!m.allFinite()) throw NumericError("expm argument has non-finite entries");
    DenseMatrix out = m.exp();
    if (!out.allFinite()) throw NumericError("expm produced non-finite entries");
    return out;
}

inline double sparse_one_norm(const SparseMatrix &m) {
    double best = 0.0;
    for (Eigen::Index k = 0; k < m.outerSize(); ++k) {
        double col = 0.0;
        for (SparseMatrix::InnerIterator it(m, k); it; ++it) col += std::abs(it.value());
        best = std::max(best, col);
    }
    return best;
}

/// exp(-i G dt) v by a truncated Taylor series. The interval is split so each
/// substep has ||G h||_1 <= 1/2, and each series runs until the next term is
/// below 1e-17 of the running norm.
inline Vector taylor_propagate(const SparseMatrix &generator, Vector v, double dt) {
    if (dt == 0.0) return v;
    double g = sparse_one_norm(generator) * std::abs(dt);
    int substeps = std::max(1, static_cast<int>(std::ceil(2.0 * g)));
    double h = dt / substeps;
    for (int s = 0; s < substeps; ++s) {
        Vector term = v;
        Vector sum = v;
        for (int k = 1; k < 60; ++k) {
            term = (generator * term) * (-kI * h / static_cast<double>(k));
            sum += term;
            if (term.norm() <= 1e-17 * std::max(1e-300, sum.norm())) break;
        }
        v = std::move(sum);
    }
    return v;
}

}  // namespace hcz
