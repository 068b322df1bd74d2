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

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "lorentz/kernel2d.hpp"
#include "lorentz/special.hpp"

/// Quadrature references for the kernel. The x-direction uses only pointwise
/// psi0 and the support breakpoints; nothing here touches the CDF, quantile
/// or sampler code.
namespace lorentz::oracle {

/// Adaptive Gauss-Kronrod integral of f over [a, b], split at the interior
/// breakpoints.
template <class F>
double integrate(F &&f, double a, double b, std::vector<double> breaks = {}, double tol = 1e-10)
{
    breaks.push_back(a);
    breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        double lo = std::max(a, breaks[i]), hi = std::min(b, breaks[i + 1]);
        if (hi > lo)
            total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 12, tol);
    }
    return total;
}

/// x-breakpoints of psi0(w, ., z): the end of the flat part and the support end.
inline std::vector<double> x_breaks(double w, double z)
{
    double lo = std::min(w, z), hi = std::max(w, z);
    if (w + z >= 0.0)
        return {1.0 / (1.0 + hi), 1.0 / (1.0 + lo)};
    return {1.0 / (1.0 - lo), 1.0 / (1.0 - hi)};
}

/// Integral of x^p psi0(w, x, z) over (0, r), r = infinity by default. The
/// sloped part is integrated in u = log x, where it is smooth even when the
/// support reaches far out.
inline double moment(double w, double z, int p, double r = INFINITY)
{
    auto br = x_breaks(w, z);
    double end = std::min(r, br.back());
    if (!(end > 0.0))
        return 0.0;
    double flat_end = std::min(end, br.front());
    double total = integrate([&](double x) { return std::pow(x, p) * kernel2d::psi0(w, x, z); }, 0.0, flat_end);
    if (end > br.front()) {
        total += integrate(
            [&](double u) {
                double x = std::exp(u);
                return std::pow(x, p + 1) * kernel2d::psi0(w, x, z);
            },
            std::log(br.front()), std::log(end));
    }
    return total;
}

/// Integral of K0(w, z) over z in (lo, hi). The inner x-integral uses the
/// closed form, which is checked against moment() separately; nesting two
/// adaptive quadratures costs seconds per call. K0 has kinks at z = w and
/// z = -w, and a log singularity at z = -sign(w) as |w| approaches 1.
inline double eta_mass(double w, double lo, double hi)
{
    auto k0 = [w](double z) {
        z = std::clamp(z, std::nextafter(-1.0, 0.0), std::nextafter(1.0, 0.0));
        return kernel2d::moments(w, z).k0;
    };
    return integrate(k0, lo, hi, {-w, w}, 1e-11);
}

/// Inverse of an increasing function on [lo, hi] by bisection.
template <class F>
double bisect(F &&f, double target, double lo, double hi, int iters = 80)
{
    for (int i = 0; i < iters; ++i) {
        double mid = 0.5 * (lo + hi);
        (f(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Edges z_1 < ... < z_{bins-1} splitting K0(w, .) into equal-mass cells.
inline std::vector<double> eta_equal_mass_edges(double w, int bins)
{
    std::vector<double> edges;
    double total = eta_mass(w, -1.0, 1.0);
    double lo = -1.0, acc = 0.0;
    for (int k = 1; k < bins; ++k) {
        double target = total * k / bins - acc;
        double guess = lo + (1.0 - lo) / (bins - k + 1);
        double e = solve_increasing(
            [&](double z) { return std::pair{eta_mass(w, lo, z) - target, kernel2d::moments(w, z).k0}; }, lo, 1.0,
            guess, 1e-13);
        acc += eta_mass(w, lo, e);
        lo = e;
        edges.push_back(e);
    }
    return edges;
}

/// Edges splitting psi0(w, ., z) / K0 into equal-mass cells.
inline std::vector<double> xi_equal_mass_edges(double w, double z, int bins)
{
    auto br = x_breaks(w, z);
    double total = moment(w, z, 0);
    std::vector<double> edges;
    for (int k = 1; k < bins; ++k) {
        double target = total * k / bins;
        edges.push_back(bisect([&](double r) { return moment(w, z, 0, r); }, target, 0.0, br.back(), 60));
    }
    return edges;
}

/// Probabilities of the boxes cut by w_edges x x_edges x z_edges under w
/// uniform on (-1, 1) and (x, z) | w with density Psi0(w, ., .). Each box is
/// half the double integral over its (w, z) cell of a truncated-K0 difference,
/// done by tensor Gauss-Legendre of the given order with the z-range split at
/// the kinks z = w and z = -w. The last x edge may be infinite. Result index
/// is (iw * nx + ix) * nz + iz.
inline std::vector<double> histogram_masses(const std::vector<double> &w_edges, const std::vector<double> &x_edges,
                                            const std::vector<double> &z_edges, int order = 48)
{
    auto open = [](double v) { return std::clamp(v, std::nextafter(-1.0, 0.0), std::nextafter(1.0, 0.0)); };
    auto gl = gauss_legendre(order);
    std::size_t nw = w_edges.size() - 1, nx = x_edges.size() - 1, nz = z_edges.size() - 1;
    std::vector<double> out(nw * nx * nz, 0.0), cum(x_edges.size());
    for (std::size_t iw = 0; iw < nw; ++iw) {
        double wa = w_edges[iw], wb = w_edges[iw + 1];
        for (int i = 0; i < order; ++i) {
            double w = open(0.5 * (wa + wb) + 0.5 * (wb - wa) * gl.nodes[i]);
            double ww = 0.5 * (wb - wa) * gl.weights[i];
            for (std::size_t iz = 0; iz < nz; ++iz) {
                std::vector<double> br{z_edges[iz], z_edges[iz + 1]};
                for (double k : {-w, w})
                    if (k > br.front() && k < br.back())
                        br.push_back(k);
                std::sort(br.begin(), br.end());
                for (std::size_t piece = 0; piece + 1 < br.size(); ++piece) {
                    double za = br[piece], zb = br[piece + 1];
                    for (int j = 0; j < order; ++j) {
                        double z = open(0.5 * (za + zb) + 0.5 * (zb - za) * gl.nodes[j]);
                        double wt = 0.5 * ww * 0.5 * (zb - za) * gl.weights[j];
                        double k0 = kernel2d::moments(w, z).k0;
                        for (std::size_t ix = 0; ix < x_edges.size(); ++ix) {
                            double x = x_edges[ix];
                            cum[ix] = !(x > 0.0)    ? 0.0
                                      : std::isinf(x) ? k0
                                                      : kernel2d::moments_truncated(w, z, x).k0r;
                        }
                        for (std::size_t ix = 0; ix < nx; ++ix)
                            out[(iw * nx + ix) * nz + iz] += wt * (cum[ix + 1] - cum[ix]);
                    }
                }
            }
        }
    }
    return out;
}

} // namespace lorentz::oracle
