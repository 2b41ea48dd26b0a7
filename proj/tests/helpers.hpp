// SPDX-License-Identifier: Apache-2.0
//
// Small fixtures shared by the test suites.

#pragma once

#include "iclsel/core.hpp"
#include "iclsel/rng.hpp"

#include <cmath>

namespace iclsel::test {

inline DemoSet random_examples(Rng& rng, std::size_t n, std::size_t d_in, std::size_t d_out = 1) {
    DemoSet out;
    for (std::size_t i = 0; i < n; ++i) out.push_back({rng.normal_vector(d_in), rng.normal_vector(d_out)});
    return out;
}

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

/// ||a - b||_inf / max(||b||_inf, floor).
inline double rel_err(const Matrix& a, const Matrix& b, double floor = 1e-8) {
    return max_abs(a - b) / std::max(max_abs(b), floor);
}

/// Central differences of a vector function, one row per output.
template <typename F>
Matrix finite_difference_jacobian(F&& f, const Vector& x, double h = 1e-5) {
    const Vector f0 = f(x);
    Matrix J(f0.size(), x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vector xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        J.col(i) = (f(xp) - f(xm)) / (2 * h);
    }
    return J;
}

}  // namespace iclsel::test
