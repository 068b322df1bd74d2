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

#include <boost/math/interpolators/cubic_hermite.hpp>

#include <cmath>
#include <fstream>
#include <memory>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lorentz/constants.hpp"
#include "lorentz/vec.hpp"

namespace lorentz {

enum class ScatterKind { HardSphere, Table };

enum class Hypothesis { A, B, Neither };

inline const char *to_string(Hypothesis h)
{
    switch (h) {
    case Hypothesis::A:
        return "A";
    case Hypothesis::B:
        return "B";
    default:
        return "neither";
    }
}

/// theta(w) = pi - 2 asin(w): hard-sphere scattering angle.
inline double theta_hard_sphere(double w)
{
    if (!(w >= 0.0 && w < 1.0))
        throw std::domain_error("theta_hard_sphere: w must lie in [0, 1)");
    return pi - 2.0 * std::asin(w);
}

/// Scattering angle as a function of the impact parameter length w in [0, 1).
/// Tabulated models use a monotone piecewise cubic (PCHIP) through the nodes,
/// continued linearly with the end slopes outside the node range.
class ScatterModel {
public:
    static ScatterModel hard_sphere() { return ScatterModel(); }

    static ScatterModel table(std::vector<double> w, std::vector<double> theta)
    {
        if (w.size() != theta.size())
            throw std::invalid_argument("scatter table: w and theta differ in length");
        if (w.size() < 4)
            throw std::invalid_argument("scatter table: need at least 4 nodes");
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (!(w[i] >= 0.0 && w[i] < 1.0) || !std::isfinite(theta[i]))
                throw std::invalid_argument("scatter table: nodes must satisfy 0 <= w < 1 with finite theta");
            if (i > 0 && !(w[i] > w[i - 1]))
                throw std::invalid_argument("scatter table: w must be strictly increasing");
        }
        ScatterModel m;
        m.kind_ = ScatterKind::Table;
        m.w_lo_ = w.front();
        m.w_hi_ = w.back();
        auto slopes = pchip_slopes(w, theta);
        m.spline_ = std::make_shared<Spline>(std::move(w), std::move(theta), std::move(slopes));
        m.th_lo_ = (*m.spline_)(m.w_lo_);
        m.th_hi_ = (*m.spline_)(m.w_hi_);
        m.d_lo_ = m.spline_->prime(m.w_lo_);
        m.d_hi_ = m.spline_->prime(m.w_hi_);
        return m;
    }

    /// Two-column CSV (w, theta); a non-numeric first line is taken as a header.
    static ScatterModel from_csv(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("scatter table: cannot open " + path);
        std::vector<double> w, th;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#')
                continue;
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream ss(line);
            double a, b;
            if (!(ss >> a >> b)) {
                if (lineno == 1)
                    continue;
                throw std::runtime_error("scatter table: bad row " + std::to_string(lineno) + " in " + path);
            }
            w.push_back(a);
            th.push_back(b);
        }
        return table(std::move(w), std::move(th));
    }

    ScatterKind kind() const { return kind_; }

    double theta(double w) const
    {
        if (kind_ == ScatterKind::HardSphere)
            return theta_hard_sphere(w);
        if (!(w >= 0.0 && w < 1.0))
            throw std::domain_error("scatter model: w must lie in [0, 1)");
        if (w < w_lo_)
            return th_lo_ + d_lo_ * (w - w_lo_);
        if (w > w_hi_)
            return th_hi_ + d_hi_ * (w - w_hi_);
        return (*spline_)(w);
    }

    /// inf |theta| over a uniform 10^4-node grid of [0, 1).
    double b_theta(int nodes = 10000) const
    {
        double inf = std::abs(theta(0.0));
        for (int i = 1; i < nodes; ++i)
            inf = std::min(inf, std::abs(theta(double(i) / nodes)));
        return inf;
    }

private:
    using Spline = boost::math::interpolators::cubic_hermite<std::vector<double>>;

    /// Fritsch-Carlson node slopes: weighted harmonic means of the secants,
    /// zero at local extrema, one-sided three-point formula at the ends.
    static std::vector<double> pchip_slopes(const std::vector<double> &x, const std::vector<double> &y)
    {
        std::size_t n = x.size();
        std::vector<double> h(n - 1), del(n - 1), d(n, 0.0);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = x[i + 1] - x[i];
            del[i] = (y[i + 1] - y[i]) / h[i];
        }
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (del[i - 1] * del[i] > 0.0) {
                double w1 = 2.0 * h[i] + h[i - 1], w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
            }
        }
        auto end = [](double h0, double h1, double d0, double d1) {
            double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if (s * d0 <= 0.0)
                return 0.0;
            if (d0 * d1 < 0.0 && std::abs(s) > std::abs(3.0 * d0))
                return 3.0 * d0;
            return s;
        };
        d[0] = end(h[0], h[1], del[0], del[1]);
        d[n - 1] = end(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
        return d;
    }

    ScatterModel() = default;

    ScatterKind kind_ = ScatterKind::HardSphere;
    std::shared_ptr<const Spline> spline_;
    double w_lo_ = 0, w_hi_ = 0, th_lo_ = 0, th_hi_ = 0, d_lo_ = 0, d_hi_ = 0;
};

struct ThetaClass {
    Hypothesis hypothesis;
    double b_theta;
};

/// Checks the sign, endpoint and strict monotonicity conditions on a
/// 10^4-node grid of [0, 1) with tolerance tol.
inline ThetaClass classify_theta(const ScatterModel &model, int nodes = 10000, double tol = 1e-9)
{
    std::vector<double> th(nodes);
    for (int i = 0; i < nodes; ++i)
        th[i] = model.theta(double(i) / nodes);
    double inf = std::abs(th[0]);
    bool dec = true, inc = true, pos = true, neg = true;
    for (int i = 0; i < nodes; ++i) {
        inf = std::min(inf, std::abs(th[i]));
        pos = pos && th[i] > 0.0;
        neg = neg && th[i] < 0.0;
        if (i > 0) {
            dec = dec && th[i] < th[i - 1];
            inc = inc && th[i] > th[i - 1];
        }
    }
    Hypothesis h = Hypothesis::Neither;
    if (dec && pos && std::abs(th[0] - pi) <= tol)
        h = Hypothesis::A;
    else if (inc && neg && std::abs(th[0] + pi) <= tol)
        h = Hypothesis::B;
    return {h, inf};
}

/// Plane rotation by angle a.
inline Mat<2> rotation2(double a)
{
    double c = std::cos(a), s = std::sin(a);
    return {{{c, -s}, {s, c}}};
}

/// E(phi u) for a unit u in R^{d-1}: the rotation by phi in the plane of e1 and (0, u).
inline Mat<3> exp_block(double phi, const Vec<2> &u)
{
    double c = std::cos(phi), s = std::sin(phi), k = 1.0 - c;
    return {{{c, -u[0] * s, -u[1] * s},
             {u[0] * s, 1.0 - u[0] * u[0] * k, -u[0] * u[1] * k},
             {u[1] * s, -u[1] * u[0] * k, 1.0 - u[1] * u[1] * k}}};
}

/// S(w) for d = 2: rotation by sign(w) theta(|w|); S(0) = -I.
inline Mat<2> scatter_matrix(double w, const ScatterModel &model = ScatterModel::hard_sphere())
{
    if (!(std::abs(w) < 1.0))
        throw std::domain_error("scatter_matrix: |w| must be < 1");
    if (w == 0.0)
        return {{{-1.0, 0.0}, {0.0, -1.0}}};
    double th = model.theta(std::abs(w));
    return rotation2(w > 0.0 ? th : -th);
}

/// S(w) for d = 3, w in the open unit disc; S(0) = diag(-1, -1, 1).
inline Mat<3> scatter_matrix(const Vec<2> &w, const ScatterModel &model = ScatterModel::hard_sphere())
{
    double len = std::hypot(w[0], w[1]);
    if (!(len < 1.0))
        throw std::domain_error("scatter_matrix: |w| must be < 1");
    if (len == 0.0)
        return {{{-1.0, 0.0, 0.0}, {0.0, -1.0, 0.0}, {0.0, 0.0, 1.0}}};
    return exp_block(model.theta(len), Vec<2>{w[0] / len, w[1] / len});
}

/// R(v) with R(v) e1 = v: rotation by atan2(v2, v1); R(-e1) = -I.
inline Mat<2> frame_rotation(const Vec<2> &v)
{
    Vec<2> u = normalized(v);
    return {{{u[0], -u[1]}, {u[1], u[0]}}};
}

/// R(v) = E(phi v_perp / |v_perp|), phi the angle between v and e1.
/// R(e1) = I; R(-e1) = diag(-1, 1, -1), the half turn about e2.
inline Mat<3> frame_rotation(const Vec<3> &v)
{
    Vec<3> u = normalized(v);
    double perp = std::hypot(u[1], u[2]);
    if (perp == 0.0) {
        if (u[0] > 0.0)
            return identity<3>();
        return {{{-1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, -1.0}}};
    }
    // atan2 keeps full accuracy near -e1, where the asin form loses half the digits
    double phi = std::atan2(perp, u[0]);
    return exp_block(phi, Vec<2>{u[1] / perp, u[2] / perp});
}

/// Running product R_n = R_0 S(w_1) ... S(w_n) with periodic
/// re-orthonormalization against drift.
template <std::size_t D>
class RotationAccumulator {
public:
    static constexpr long reorthonormalize_every = 10000;

    explicit RotationAccumulator(const Mat<D> &r0 = identity<D>()) : r_(r0) {}

    void apply(const Mat<D> &s)
    {
        r_ = r_ * s;
        if (++count_ % reorthonormalize_every == 0)
            r_ = reorthonormalize(r_);
    }

    const Mat<D> &matrix() const { return r_; }

    /// R_n e1, renormalized.
    Vec<D> direction() const { return normalized(column(r_, 0)); }

    long count() const { return count_; }

private:
    Mat<D> r_;
    long count_ = 0;
};

/// V_0 = v0 and V_n = R(v0) S(eta_1) ... S(eta_n) e1 (d = 2).
inline std::vector<Vec<2>> velocity_chain(const Vec<2> &v0, std::span<const double> etas,
                                          const ScatterModel &model = ScatterModel::hard_sphere())
{
    std::vector<Vec<2>> out;
    out.reserve(etas.size() + 1);
    out.push_back(normalized(v0));
    RotationAccumulator<2> acc(frame_rotation(v0));
    for (double eta : etas) {
        acc.apply(scatter_matrix(eta, model));
        out.push_back(acc.direction());
    }
    return out;
}

/// Outgoing state of the scattering map for incoming direction v_minus and
/// impact parameter b (orthogonal to v_minus, |b| < 1), d = 2:
/// (v_plus, s) = (R S(w) e1, R S(w) (0, w)).
struct ScatterOutcome2 {
    Vec<2> v_plus;
    Vec<2> exit_param;
};

inline ScatterOutcome2 scatter_map(const Vec<2> &v_minus, const Vec<2> &b,
                                   const ScatterModel &model = ScatterModel::hard_sphere())
{
    Mat<2> r = frame_rotation(v_minus);
    double w = dot(column(r, 1), b);
    Mat<2> rs = r * scatter_matrix(w, model);
    return {column(rs, 0), w * column(rs, 1)};
}

} // namespace lorentz
