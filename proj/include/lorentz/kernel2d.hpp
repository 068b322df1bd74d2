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

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "lorentz/constants.hpp"
#include "lorentz/rng.hpp"
#include "lorentz/special.hpp"

/// The explicit two-dimensional Boltzmann-Grad transition kernel Psi0(w, x, z):
/// density of the next free path x and next impact parameter z given the
/// current exit parameter w, together with its moments, conditional CDFs and
/// exact samplers.
namespace lorentz::kernel2d {

struct KernelArgs {
    double w;
    double x;
    double z;
};

/// (K0, K1, K2): integrals of x^p Psi0(w, x, z) over x.
struct MomentTriple {
    double k0;
    double k1;
    double k2;
};

struct TruncatedMoments {
    double k0r;
    double k1r;
    double k2r;
};

struct StationaryDiscrete {};
struct StationaryContinuous {};
struct Custom {
    double w;
};

/// Law of the first step: Psi0(x, z), Psi(x, z), or conditioned on eta_0 = w.
using InitialLaw = std::variant<StationaryDiscrete, StationaryContinuous, Custom>;

/// First step of a chain: eta_0 (the conditioning parameter), xi_1, eta_1.
struct InitialDraw {
    double eta0;
    double xi;
    double eta1;
};

inline constexpr double degenerate_gap = 1e-7;

namespace detail {

inline void check_param(double v, const char *what)
{
    if (!(std::abs(v) < 1.0))
        throw std::domain_error(std::string("kernel2d: |") + what + "| must be < 1, got " + std::to_string(v));
}

/// Reduction to a >= b, a + b >= 0 using Psi0(w,x,z) = Psi0(z,x,w) = Psi0(-w,x,-z).
/// The line w + z = 0 stays on the non-negative branch.
struct Canonical {
    double a;
    double b;

    double s() const { return 1.0 + b; }
    double gap() const { return a - b; }
    double x1() const { return 1.0 / (1.0 + a); }
    double x2() const { return 1.0 / (1.0 + b); }
};

inline Canonical canonical(double w, double z)
{
    check_param(w, "w");
    check_param(z, "z");
    if (w + z < 0.0) {
        w = -w;
        z = -z;
    }
    return w >= z ? Canonical{w, z} : Canonical{z, w};
}

/// -log(1 - g) - g, accurate for small g.
inline double log_excess(double g)
{
    if (g < 1e-4) {
        double g2 = g * g;
        return g2 * (0.5 + g * (1.0 / 3.0 + g * (0.25 + g * (0.2 + g / 6.0))));
    }
    return -std::log1p(-g) - g;
}

inline double k0_canonical(const Canonical &c)
{
    double s = c.s();
    double y = c.gap() / s;
    double ratio = c.gap() < degenerate_gap ? (1.0 - y * (0.5 - y / 3.0)) / s : std::log1p(y) / c.gap();
    return kernel_peak * ratio;
}

inline MomentTriple moments_canonical(const Canonical &c)
{
    double pa = 1.0 + c.a, pb = c.s();
    return {k0_canonical(c), 3.0 / (pi * pi) / (pa * pb), (2.0 + c.a + c.b) / (pi * pi) / (pa * pa * pb * pb)};
}

/// Mass of x^p Psi0 above R, for x1 <= R <= x2, as a function of g = 1 - (1 + b) R.
/// Under x = x2 / (1 + y) the sloped branch becomes (1/gap) y (1 + y)^-(p+2) dy.
inline TruncatedMoments sloped_tail(const Canonical &c, double g)
{
    double gap = c.gap();
    if (gap <= 0.0 || g <= 0.0)
        return {0.0, 0.0, 0.0};
    double x2 = c.x2();
    double g2 = g * g;
    return {kernel_peak * log_excess(g) / gap, kernel_peak * x2 * 0.5 * g2 / gap,
            kernel_peak * x2 * x2 * g2 * (0.5 - g / 3.0) / gap};
}

inline TruncatedMoments truncated_canonical(const Canonical &c, double r)
{
    double x1 = c.x1(), x2 = c.x2();
    if (r <= x1) {
        double r2 = r * r;
        return {kernel_peak * r, kernel_peak * r2 / 2.0, kernel_peak * r2 * r / 3.0};
    }
    auto full = moments_canonical(c);
    if (r >= x2)
        return {full.k0, full.k1, full.k2};
    auto tail = sloped_tail(c, std::fma(-c.s(), r, 1.0));
    return {std::min(full.k0 - tail.k0r, full.k0), std::min(full.k1 - tail.k1r, full.k1),
            std::min(full.k2 - tail.k2r, full.k2)};
}

} // namespace detail

inline void validate(const KernelArgs &args)
{
    detail::check_param(args.w, "w");
    detail::check_param(args.z, "z");
    if (!(args.x > 0.0))
        throw std::domain_error("kernel2d: free path x must be > 0");
}

/// Psi0(w, x, z); zero beyond the support.
inline double psi0(const KernelArgs &args)
{
    validate(args);
    auto c = detail::canonical(args.w, args.z);
    double x = args.x;
    if (x < c.x1())
        return kernel_peak;
    if (x >= c.x2())
        return 0.0;
    double slope = std::fma(-c.s(), x, 1.0) / (x * c.gap());
    return kernel_peak * std::clamp(slope, 0.0, 1.0);
}

inline double psi0(double w, double x, double z) { return psi0(KernelArgs{w, x, z}); }

/// x0(w, z): Psi0(w, x, z) > 0 exactly when x < x0.
inline double support_x0(double w, double z) { return detail::canonical(w, z).x2(); }

inline MomentTriple moments(double w, double z) { return detail::moments_canonical(detail::canonical(w, z)); }

/// K_{p,r} = integral of x^p Psi0 over (0, r), p = 0, 1, 2.
inline TruncatedMoments moments_truncated(double w, double z, double r)
{
    auto c = detail::canonical(w, z);
    if (!(r >= 0.0))
        throw std::domain_error("kernel2d: truncation radius must be >= 0");
    return detail::truncated_canonical(c, r);
}

/// P(xi <= x | eta_{n-1} = w, eta_n = z).
inline double xi_cdf(double w, double z, double x)
{
    auto c = detail::canonical(w, z);
    if (!(x >= 0.0))
        throw std::domain_error("kernel2d: x must be >= 0");
    double k0 = detail::k0_canonical(c);
    if (x <= c.x1())
        return std::min(kernel_peak * x / k0, 1.0);
    if (x >= c.x2())
        return 1.0;
    double tail = detail::sloped_tail(c, std::fma(-c.s(), x, 1.0)).k0r;
    return std::clamp(1.0 - tail / k0, 0.0, 1.0);
}

/// Inverse of xi_cdf. The constant branch inverts in closed form; on the
/// sloped branch the tail mass (peak/gap) * (-log(1-g) - g) is solved for g
/// by safeguarded Newton on its square root, which is nearly linear in g.
inline double xi_quantile(double w, double z, double q)
{
    auto c = detail::canonical(w, z);
    if (!(q >= 0.0 && q <= 1.0))
        throw std::domain_error("kernel2d: quantile level must lie in [0, 1]");
    double k0 = detail::k0_canonical(c);
    double x1 = c.x1();
    double mass = q * k0;
    if (mass <= kernel_peak * x1)
        return mass / kernel_peak;
    double g_max = c.gap() * x1;
    if (g_max <= 0.0)
        return x1;
    double target = std::sqrt((1.0 - q) * k0 * c.gap() / kernel_peak);
    auto eval = [&](double g) {
        double e = detail::log_excess(g);
        double root = std::sqrt(e);
        double d = root > 0.0 ? (g / (1.0 - g)) / (2.0 * root) : std::sqrt(0.5);
        return std::pair{root - target, d};
    };
    double g = solve_increasing(eval, 0.0, g_max, target * std::sqrt(2.0), 1e-15 * g_max);
    g = std::clamp(g, 0.0, g_max);
    return c.x2() * (1.0 - g);
}

/// Quantile of the size-biased law x Psi0(w, x, z) / K1(w, z); closed form.
inline double xi_size_biased_quantile(double w, double z, double q)
{
    auto c = detail::canonical(w, z);
    double k1 = detail::moments_canonical(c).k1;
    double x1 = c.x1();
    double mass = q * k1;
    if (mass <= kernel_peak * x1 * x1 / 2.0)
        return std::sqrt(2.0 * mass / kernel_peak);
    double g = std::sqrt(2.0 * c.gap() * (1.0 - q) * k1 / (kernel_peak * c.x2()));
    g = std::clamp(g, 0.0, c.gap() * x1);
    return c.x2() * (1.0 - g);
}

/// Conditional CDF of eta_n given eta_{n-1} = w, in closed form.
///
/// With c = 6/pi^2, integrating K0(w, .) gives dilogarithms:
///   G(z) = c [Li2((z - w)/(1 - w)) - Li2(-(1 + w)/(1 - w))]      for z <= -w,
///   G(z) = 1 - c [Li2((w - z)/(1 + w)) - Li2(-(1 - w)/(1 + w))]  for z >= -w.
class EtaCdf {
public:
    explicit EtaCdf(double w) : w_(w)
    {
        detail::check_param(w, "w");
        low_const_ = dilog(-(1.0 + w) / (1.0 - w));
        // Li2(x) + Li2(1/x) = -zeta(2) - log(-x)^2 / 2 for x < 0
        double l = 2.0 * std::atanh(w);
        high_const_ = -zeta2 - 0.5 * l * l - low_const_;
        mid_ = lower(-w);
    }

    double w() const { return w_; }

    double operator()(double z) const
    {
        if (z <= -1.0)
            return 0.0;
        if (z >= 1.0)
            return 1.0;
        return std::clamp(z <= -w_ ? lower(z) : upper(z), 0.0, 1.0);
    }

    double density(double z) const { return moments(w_, z).k0; }

    /// Smallest z with G(z) >= q, to ~1e-15 absolute.
    double quantile(double q, double guess = 2.0) const
    {
        if (!(q >= 0.0 && q <= 1.0))
            throw std::domain_error("kernel2d: quantile level must lie in [0, 1]");
        if (q == 0.0)
            return -1.0;
        if (q == 1.0)
            return 1.0;
        bool low = q <= mid_;
        double lo = low ? -1.0 : -w_;
        double hi = low ? -w_ : 1.0;
        auto eval = [&](double z) {
            double g = low ? lower(z) : upper(z);
            return std::pair{g - q, density(std::clamp(z, -1.0 + 1e-300, 1.0 - 1e-16))};
        };
        if (!(guess > lo && guess < hi))
            guess = lo + (hi - lo) * (low ? q / std::max(mid_, 1e-300) : (q - mid_) / std::max(1.0 - mid_, 1e-300));
        double z = solve_increasing(eval, lo, hi, guess, 1e-15);
        return std::clamp(z, std::nextafter(-1.0, 0.0), std::nextafter(1.0, 0.0));
    }

private:
    double lower(double z) const { return kernel_peak * (dilog((z - w_) / (1.0 - w_)) - low_const_); }
    double upper(double z) const { return 1.0 - kernel_peak * (dilog((w_ - z) / (1.0 + w_)) - high_const_); }

    double w_;
    double low_const_;
    double high_const_;
    double mid_;
};

inline double eta_cdf(double w, double z)
{
    detail::check_param(z, "z");
    return EtaCdf(w)(z);
}

/// Quantile table for G_w giving Newton starting points; built once, then
/// read-only. Grid: uniform cells in w, Chebyshev-clustered levels in q so
/// the logarithmic corners of K0 are resolved.
class EtaQuantileTable {
public:
    explicit EtaQuantileTable(int w_cells = 256, int q_nodes = 256)
        : nw_(w_cells), nq_(q_nodes), table_(std::size_t(w_cells) * (q_nodes + 1))
    {
        for (int i = 0; i < nw_; ++i) {
            EtaCdf cdf(w_node(i));
            double prev = -1.0;
            for (int k = 0; k <= nq_; ++k) {
                double q = q_node(k);
                double zq = cdf.quantile(q);
                prev = std::max(prev, zq);
                table_[std::size_t(i) * (nq_ + 1) + k] = prev;
            }
        }
    }

    /// Bilinear estimate of G_w^{-1}(q).
    double guess(double w, double q) const
    {
        double fw = (w + 1.0) * 0.5 * nw_ - 0.5;
        int i = std::clamp(static_cast<int>(std::floor(fw)), 0, nw_ - 2);
        double tw = std::clamp(fw - i, 0.0, 1.0);
        double fq = std::acos(std::clamp(1.0 - 2.0 * q, -1.0, 1.0)) / pi * nq_;
        int k = std::clamp(static_cast<int>(fq), 0, nq_ - 1);
        double q0 = q_node(k), q1 = q_node(k + 1);
        double tq = q1 > q0 ? std::clamp((q - q0) / (q1 - q0), 0.0, 1.0) : 0.0;
        auto at = [&](int ii, int kk) { return table_[std::size_t(ii) * (nq_ + 1) + kk]; };
        double lo = at(i, k) + tq * (at(i, k + 1) - at(i, k));
        double hi = at(i + 1, k) + tq * (at(i + 1, k + 1) - at(i + 1, k));
        return lo + tw * (hi - lo);
    }

    static const EtaQuantileTable &shared()
    {
        static const EtaQuantileTable table;
        return table;
    }

private:
    double w_node(int i) const { return -1.0 + (i + 0.5) * 2.0 / nw_; }
    double q_node(int k) const { return 0.5 * (1.0 - std::cos(pi * k / nq_)); }

    int nw_;
    int nq_;
    std::vector<double> table_;
};

/// Draw eta_n ~ K0(w, .) by exact inversion of the dilogarithm CDF.
template <class Rng>
double sample_eta_given(double w, Rng &rng)
{
    EtaCdf cdf(w);
    double q = uniform_open(rng);
    return cdf.quantile(q, EtaQuantileTable::shared().guess(w, q));
}

/// Draw xi_n ~ Psi0(w, ., z) / K0(w, z).
template <class Rng>
double sample_xi_given(double w, double z, Rng &rng)
{
    return xi_quantile(w, z, uniform_open(rng));
}

namespace detail {

/// (w, z) with density K1(w, z) on (-1, 1)^2. On {w + z >= 0} the substitution
/// u = log(1 + w), v = log(1 + z) makes the law uniform on
/// {u, v <= log 2, e^u + e^v >= 2}; the u-marginal in t = e^u / 2 has CDF
/// Li2(t) / zeta(2), and v | u is uniform on [log(2 - 2t), log 2].
template <class Rng>
std::pair<double, double> sample_k1_pair(Rng &rng)
{
    double target = uniform_open(rng) * zeta2;
    double t = solve_increasing(
        [&](double tt) {
            double d = tt > 0.0 ? -std::log1p(-tt) / tt : 1.0;
            return std::pair{dilog(tt) - target, d};
        },
        0.0, 1.0, target / zeta2, 1e-15);
    t = std::clamp(t, 1e-300, std::nextafter(1.0, 0.0));
    double w = 2.0 * t - 1.0;
    double vlo = std::log(2.0 - 2.0 * t);
    double z = std::expm1(uniform_open(rng, vlo, std::log(2.0)));
    z = std::min(z, std::nextafter(1.0, 0.0));
    if (uniform_open(rng) < 0.5)
        return {-w, -z};
    return {w, z};
}

} // namespace detail

/// First step (eta_0, xi_1, eta_1) under an initial law.
template <class Rng>
InitialDraw sample_initial(const InitialLaw &law, Rng &rng)
{
    return std::visit(
        [&rng](const auto &mode) -> InitialDraw {
            using M = std::decay_t<decltype(mode)>;
            if constexpr (std::is_same_v<M, StationaryContinuous>) {
                auto [w, z] = detail::sample_k1_pair(rng);
                double full = xi_size_biased_quantile(w, z, uniform_open(rng));
                return {w, uniform_open(rng) * full, z};
            } else {
                double w;
                if constexpr (std::is_same_v<M, Custom>) {
                    detail::check_param(mode.w, "w");
                    w = mode.w;
                } else {
                    w = uniform_open(rng, -1.0, 1.0);
                }
                double z = sample_eta_given(w, rng);
                return {w, sample_xi_given(w, z, rng), z};
            }
        },
        law);
}

} // namespace lorentz::kernel2d
