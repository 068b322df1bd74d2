// Copyright 2026 The lorentz-bg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lorentz/constants.hpp"

namespace lorentz {

/// Real dilogarithm Li2(x) for x <= 1.
///
/// The argument is mapped into [-1, 1/2] with the inversion and reflection
/// identities, where the Bernoulli series in u = -log(1 - x) converges to full
/// double precision in ten terms.
inline double dilog(double x)
{
    if (!(x <= 1.0))
        throw std::domain_error("dilog: argument must be <= 1");
    if (x == 1.0)
        return zeta2;
    if (x < -1.0) {
        double l = std::log(-x);
        return -zeta2 - 0.5 * l * l - dilog(1.0 / x);
    }
    if (x > 0.5)
        return zeta2 - std::log(x) * std::log1p(-x) - dilog(1.0 - x);
    static constexpr double b[] = {
        0.027777777777777776,   -0.0002777777777777778, 4.72411186696901e-06,   -9.185773074661964e-08,
        1.8978869988971e-09,    -4.0647616451442256e-11, 8.921691020456452e-13, -1.9939295860721074e-14,
        4.518980029619918e-16,  -1.0356517612181247e-17,
    };
    double u = -std::log1p(-x);
    double u2 = u * u;
    double series = 0.0;
    for (int k = 9; k >= 0; --k)
        series = series * u2 + b[k];
    return u - 0.25 * u2 + u * u2 * series;
}

/// Gauss-Legendre nodes and weights on (-1, 1), nodes ascending.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline GaussLegendre gauss_legendre(int m)
{
    if (m < 1)
        throw std::invalid_argument("gauss_legendre: need at least one node");
    // (P_m(x), P_m'(x)) by the three-term recurrence
    auto legendre = [m](double x) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= m; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        return std::pair{p1, m * (x * p1 - p0) / (x * x - 1.0)};
    };
    GaussLegendre g{std::vector<double>(m), std::vector<double>(m)};
    for (int i = 0; i < (m + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (m + 0.5));
        for (int it = 0; it < 100; ++it) {
            auto [p, dp] = legendre(x);
            double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        double dp = legendre(x).second;
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        g.nodes[m - 1 - i] = x;
        g.nodes[i] = -x;
        g.weights[i] = g.weights[m - 1 - i] = w;
    }
    if (m % 2 == 1)
        g.nodes[m / 2] = 0.0;
    return g;
}

/// Solves g(x) = 0 for an increasing g on [lo, hi] with g(lo) <= 0 <= g(hi).
/// `eval` returns the pair (g(x), g'(x)). Newton steps that leave the bracket
/// or stall fall back to bisection; stops when the bracket or step is below
/// `tol`.
template <class F>
double solve_increasing(F &&eval, double lo, double hi, double x0, double tol)
{
    double x = (x0 > lo && x0 < hi) ? x0 : 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        auto [g, dg] = eval(x);
        if (g == 0.0)
            return x;
        if (g < 0.0)
            lo = x;
        else
            hi = x;
        if (hi - lo <= tol)
            return 0.5 * (lo + hi);
        double next = x - g / dg;
        if (!(dg > 0.0) || !(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 0.25 * tol)
            return next;
        x = next;
    }
    return x;
}

} // namespace lorentz
