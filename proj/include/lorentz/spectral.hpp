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
#include <functional>
#include <vector>

#include "lorentz/errors.hpp"
#include "lorentz/kernel2d.hpp"
#include "lorentz/special.hpp"

namespace lorentz::stats {

/// Discretization of the transition operator (Pf)(w) = int K(w, z) f(z) dz
/// on L^2((-1, 1), dw / 2). Nodes are Gauss-Legendre points; cell k spans
/// [edges[k], edges[k+1]], whose widths are the quadrature weights. Rows are
/// product-integrated: p(i, k) = G(w_i, edges[k+1]) - G(w_i, edges[k]) with
/// G(w, .) the conditional CDF, so no mass is lost near the logarithmic
/// corners of K0.
struct OperatorGrid {
    int m = 0;
    std::vector<double> nodes;
    std::vector<double> edges;
    std::vector<double> widths;
    std::vector<double> p;
    /// max |row sum - 1| before renormalization
    double row_drift = 0.0;

    double at(int i, int k) const { return p[std::size_t(i) * m + k]; }
};

/// cdf(w, z): conditional CDF of the next parameter given w.
using ConditionalCdf = std::function<double(double, double)>;

inline OperatorGrid build_operator_grid(int m, const ConditionalCdf &cdf)
{
    if (m < 2)
        throw std::invalid_argument("build_operator_grid: need m >= 2");
    auto gl = gauss_legendre(m);
    OperatorGrid g;
    g.m = m;
    g.nodes = gl.nodes;
    g.edges.resize(m + 1);
    g.edges[0] = -1.0;
    for (int k = 0; k < m; ++k)
        g.edges[k + 1] = g.edges[k] + gl.weights[k];
    g.edges[m] = 1.0;
    g.widths.resize(m);
    for (int k = 0; k < m; ++k)
        g.widths[k] = g.edges[k + 1] - g.edges[k];
    g.p.assign(std::size_t(m) * m, 0.0);
    for (int i = 0; i < m; ++i) {
        double prev = cdf(g.nodes[i], g.edges[0]);
        double row = 0.0;
        for (int k = 0; k < m; ++k) {
            double next = cdf(g.nodes[i], g.edges[k + 1]);
            g.p[std::size_t(i) * m + k] = next - prev;
            row += next - prev;
            prev = next;
        }
        g.row_drift = std::max(g.row_drift, std::abs(row - 1.0));
        for (int k = 0; k < m; ++k)
            g.p[std::size_t(i) * m + k] /= row;
    }
    return g;
}

inline OperatorGrid build_operator_grid(int m)
{
    return build_operator_grid(m, [](double w, double z) {
        if (z <= -1.0)
            return 0.0;
        if (z >= 1.0)
            return 1.0;
        return kernel2d::EtaCdf(w)(z);
    });
}

struct SpectralEstimate {
    double omega = 0.0;
    int iterations = 0;
    double row_drift = 0.0;
};

/// ||P - Pi|| on the weighted space, Pi f = (1/2) int f: the largest singular
/// value of B = D^{1/2} (P - 1 c^T) D^{-1/2}, D = diag(widths / 2),
/// c = widths / 2, found by power iteration on B^T B.
inline SpectralEstimate operator_gap_norm(const OperatorGrid &g, double tol = 1e-10, int max_iter = 100000)
{
    int m = g.m;
    std::vector<double> sq(m), isq(m), c(m);
    for (int k = 0; k < m; ++k) {
        c[k] = g.widths[k] / 2.0;
        sq[k] = std::sqrt(c[k]);
        isq[k] = 1.0 / sq[k];
    }
    std::vector<double> b(std::size_t(m) * m);
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < m; ++k)
            b[std::size_t(i) * m + k] = sq[i] * (g.at(i, k) - c[k]) * isq[k];
    std::vector<double> x(m, 1.0), y(m), z(m);
    // start away from the (annihilated) constant direction
    for (int k = 0; k < m; ++k)
        x[k] = g.nodes[k] + 0.5 * g.nodes[k] * g.nodes[k];
    double lambda = 0.0;
    SpectralEstimate est;
    est.row_drift = g.row_drift;
    for (int it = 1; it <= max_iter; ++it) {
        double nx = 0.0;
        for (double v : x)
            nx += v * v;
        nx = std::sqrt(nx);
        if (nx == 0.0) {
            est.iterations = it;
            return est;
        }
        for (double &v : x)
            v /= nx;
        for (int i = 0; i < m; ++i) {
            double s = 0.0;
            for (int k = 0; k < m; ++k)
                s += b[std::size_t(i) * m + k] * x[k];
            y[i] = s;
        }
        for (int k = 0; k < m; ++k) {
            double s = 0.0;
            for (int i = 0; i < m; ++i)
                s += b[std::size_t(i) * m + k] * y[i];
            z[k] = s;
        }
        double next = 0.0;
        for (int k = 0; k < m; ++k)
            next += x[k] * z[k];
        x.swap(z);
        if (std::abs(next - lambda) <= tol * std::max(next, 1e-300) || next == 0.0) {
            est.omega = std::sqrt(std::max(next, 0.0));
            est.iterations = it;
            return est;
        }
        lambda = next;
    }
    throw convergence_error("spectral gap: power iteration did not converge");
}

/// Estimate of omega_0 = ||P - Pi|| for the two-dimensional kernel K0.
inline SpectralEstimate spectral_gap(int m)
{
    if (m < 50)
        throw std::invalid_argument("spectral_gap: need m >= 50");
    return operator_gap_norm(build_operator_grid(m));
}

} // namespace lorentz::stats
