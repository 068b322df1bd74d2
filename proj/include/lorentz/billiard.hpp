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

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <type_traits>
#include <vector>

#include "lorentz/constants.hpp"
#include "lorentz/csv.hpp"
#include "lorentz/errors.hpp"
#include "lorentz/rng.hpp"
#include "lorentz/scattering.hpp"
#include "lorentz/vec.hpp"

/// Finite-radius periodic Lorentz gas on the scaled cubic lattice
/// r^{(d-1)/d} Z^d, d = 2 or 3.
namespace lorentz::billiard {

template <std::size_t D>
using Cell = std::array<std::int64_t, D>;

/// Kernel coordinate of a collision: a scalar for d = 2, a point of the unit disc for d = 3.
template <std::size_t D>
using ImpactParam = std::conditional_t<D == 2, double, Vec<2>>;

template <std::size_t D>
struct BilliardConfig {
    double r = 1e-3;
    ScatterModel model = ScatterModel::hard_sphere();
    double l_max = 1e5;
    double eps_graze = 1e-14;

    double lattice_spacing() const { return std::pow(r, double(D - 1) / double(D)); }

    void validate() const
    {
        static_assert(D == 2 || D == 3, "billiard: d must be 2 or 3");
        if (!(r > 0.0))
            throw config_error("billiard: radius must be > 0");
        if (!(2.0 * r < lattice_spacing()))
            throw config_error("billiard: scatterers overlap (2r >= spacing)");
        if (!(l_max > 0.0))
            throw config_error("billiard: l_max must be > 0");
        if (!(eps_graze >= 0.0))
            throw config_error("billiard: eps_graze must be >= 0");
        if (D == 3 && model.kind() != ScatterKind::HardSphere)
            throw config_error("billiard: tabulated scattering models are d = 2 only");
    }
};

/// A point as lattice cell plus offset from that cell's center (macroscopic units).
template <std::size_t D>
struct Position {
    Cell<D> cell{};
    Vec<D> offset{};
};

template <std::size_t D>
Vec<D> cell_center(const BilliardConfig<D> &cfg, const Cell<D> &c)
{
    Vec<D> x{};
    double a = cfg.lattice_spacing();
    for (std::size_t i = 0; i < D; ++i)
        x[i] = a * double(c[i]);
    return x;
}

template <std::size_t D>
Vec<D> absolute(const BilliardConfig<D> &cfg, const Position<D> &p)
{
    return cell_center(cfg, p.cell) + p.offset;
}

template <std::size_t D>
Position<D> locate(const BilliardConfig<D> &cfg, const Vec<D> &x)
{
    Position<D> p;
    double a = cfg.lattice_spacing();
    for (std::size_t i = 0; i < D; ++i) {
        p.cell[i] = static_cast<std::int64_t>(std::llround(x[i] / a));
        p.offset[i] = x[i] - a * double(p.cell[i]);
    }
    return p;
}

template <std::size_t D>
struct Hit {
    Cell<D> center;
    /// Collision point minus center, length r.
    Vec<D> point;
    double length;
};

/// Nearest scatterer hit along the ray, or nullopt when the ray travels
/// farther than l_max.
///
/// Every disc lies inside its own Voronoi cell (2r < spacing), so walking the
/// cells in the order the ray enters them and testing only each cell's own
/// scatterer finds the nearest hit exactly. Cell boundaries are recomputed
/// from integer offsets at every step; nothing accumulates.
template <std::size_t D>
std::optional<Hit<D>> first_collision(const BilliardConfig<D> &cfg, const Position<D> &pos, const Vec<D> &vel,
                                      const std::optional<Cell<D>> &exclude = std::nullopt)
{
    double a = cfg.lattice_spacing();
    double rho = cfg.r / a;
    Vec<D> v = normalized(vel);
    Vec<D> p0 = (1.0 / a) * pos.offset;
    // re-center so |p0_i| <= 1/2
    Cell<D> c0 = pos.cell;
    for (std::size_t i = 0; i < D; ++i) {
        double k = std::round(p0[i]);
        if (k != 0.0) {
            c0[i] += static_cast<std::int64_t>(k);
            p0[i] -= k;
        }
    }
    std::array<int, D> step{};
    for (std::size_t i = 0; i < D; ++i)
        step[i] = v[i] > 0.0 ? 1 : (v[i] < 0.0 ? -1 : 0);
    Cell<D> delta{};
    double t_limit = cfg.l_max / a;
    bool first_cell = true;
    for (;;) {
        Cell<D> cell = c0;
        for (std::size_t i = 0; i < D; ++i)
            cell[i] += delta[i];
        bool skip = exclude && *exclude == cell;
        if (!skip) {
            Vec<D> d{};
            for (std::size_t i = 0; i < D; ++i)
                d[i] = p0[i] - double(delta[i]);
            if (first_cell && dot(d, d) < rho * rho * (1.0 - 1e-12))
                throw geometry_error("first_collision: start point is inside a scatterer");
            double b = dot(d, v);
            if (b < 0.0) {
                Vec<D> h;
                double h2;
                if constexpr (D == 2) {
                    double hs = cross(v, d);
                    h = hs * perp(v);
                    h2 = hs * hs;
                } else {
                    h = d - b * v;
                    h2 = dot(h, h);
                }
                double disc = 1.0 - h2 / (rho * rho);
                if (disc >= cfg.eps_graze && disc > 0.0) {
                    double root = rho * std::sqrt(disc);
                    double t = -b - root;
                    if (t * a > cfg.l_max)
                        return std::nullopt;
                    Vec<D> rel = h - root * v;
                    rel = (rho / norm(rel)) * rel;
                    return Hit<D>{cell, a * rel, t * a};
                }
            }
        }
        first_cell = false;
        // advance to the neighbouring cell the ray enters first
        std::size_t axis = 0;
        double tmin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < D; ++i) {
            if (step[i] == 0)
                continue;
            double t = (double(delta[i]) + 0.5 * step[i] - p0[i]) / v[i];
            if (t < tmin) {
                tmin = t;
                axis = i;
            }
        }
        if (!(tmin <= t_limit))
            return std::nullopt;
        delta[axis] += step[axis];
    }
}

/// Specular reflection v - 2 (v.n) n, or for tabulated models the rotation
/// R(v) S(w) e1 with w read off the impact geometry (d = 2).
template <std::size_t D>
Vec<D> scatter(const BilliardConfig<D> &cfg, const Vec<D> &point_rel, const Vec<D> &v_in)
{
    double len = norm(point_rel);
    if (std::abs(len - cfg.r) > 1e-9 * cfg.r)
        throw geometry_error("scatter: point is not on the scatterer boundary");
    Vec<D> n = (1.0 / len) * point_rel;
    if (cfg.model.kind() == ScatterKind::HardSphere || D == 3)
        return normalized(v_in - (2.0 * dot(v_in, n)) * n);
    if constexpr (D == 2) {
        Vec<2> v = normalized(v_in);
        double w = std::clamp(dot(n, perp(v)), -1.0 + 1e-16, 1.0 - 1e-16);
        return normalized(frame_rotation(v) * column(scatter_matrix(w, cfg.model), 0));
    }
    return v_in;
}

/// Exit point, relative to the center, of a particle leaving with velocity
/// v_plus and exit parameter s (orthogonal to v_plus, |s| < 1):
/// r (s + sqrt(1 - |s|^2) v_plus).
template <std::size_t D>
Vec<D> exit_point(double r, const Vec<D> &s, const Vec<D> &v_plus)
{
    double s2 = std::min(dot(s, s), 1.0);
    Vec<D> x = r * (s + std::sqrt(1.0 - s2) * v_plus);
    return (r / norm(x)) * x;
}

template <std::size_t D>
struct BilliardTrajectory {
    /// centers[j] and q[j]: scatterer and exit point (relative to its center)
    /// of collision j; j = 0 is the starting scatterer at the origin.
    std::vector<Cell<D>> centers;
    std::vector<Vec<D>> q;
    std::vector<Vec<D>> v;
    /// path_len[j-1]: flight from collision j-1 to collision j.
    std::vector<double> path_len;
    /// w_impact[j-1]: impact parameter of collision j in frame R_{j-1}.
    std::vector<ImpactParam<D>> w_impact;
    /// w_exit[j]: exit parameter of collision j in frame R_j (w_exit[0] = s_0).
    std::vector<ImpactParam<D>> w_exit;
    bool escaped = false;
    std::uint64_t seed = 0;
    std::uint64_t index = 0;

    long collisions() const { return static_cast<long>(path_len.size()); }
};

/// Uniform point s_0 of the unit (d-1)-disc orthogonal to v0, and
/// q0 = r (s0 + v0 sqrt(1 - |s0|^2)) on the scatterer at the origin.
template <std::size_t D, class Rng>
std::pair<Vec<D>, ImpactParam<D>> sample_boundary_init(const BilliardConfig<D> &cfg, const Vec<D> &v0, Rng &rng)
{
    Vec<D> v = normalized(v0);
    auto frame = frame_rotation(v);
    if constexpr (D == 2) {
        double s0 = uniform_open(rng, -1.0, 1.0);
        return {exit_point<2>(cfg.r, s0 * column(frame, 1), v), s0};
    } else {
        Vec<2> s0;
        do {
            s0 = {uniform_open(rng, -1.0, 1.0), uniform_open(rng, -1.0, 1.0)};
        } while (s0[0] * s0[0] + s0[1] * s0[1] >= 1.0);
        Vec<3> s = s0[0] * column(frame, 1) + s0[1] * column(frame, 2);
        return {exit_point<3>(cfg.r, s, v), s0};
    }
}

namespace detail {

/// (R^T x) restricted to the components orthogonal to e1.
template <std::size_t D>
ImpactParam<D> frame_coords(const Mat<D> &frame, const Vec<D> &x)
{
    Vec<D> y = transpose(frame) * x;
    if constexpr (D == 2)
        return y[1];
    else
        return Vec<2>{y[1], y[2]};
}

template <std::size_t D>
Mat<D> scatter_of(const ImpactParam<D> &w, const ScatterModel &model)
{
    if constexpr (D == 2) {
        return scatter_matrix(std::clamp(w, -1.0 + 1e-16, 1.0 - 1e-16), model);
    } else {
        double len = std::hypot(w[0], w[1]);
        Vec<2> ww = len < 1.0 ? w : (std::nextafter(1.0, 0.0) / len) * w;
        return scatter_matrix(ww, model);
    }
}

} // namespace detail

/// Continues a trajectory from an exit point: the particle leaves scatterer
/// start.cell at offset start.offset with velocity v and frame R (R e1 = v).
/// Appends up to n collisions; stops early and sets escaped on a flight
/// longer than l_max.
template <std::size_t D>
void continue_trajectory(const BilliardConfig<D> &cfg, BilliardTrajectory<D> &traj, Position<D> start, Vec<D> v,
                         Mat<D> frame, long n)
{
    std::optional<Cell<D>> exclude = start.cell;
    for (long j = 0; j < n; ++j) {
        auto hit = first_collision(cfg, start, v, exclude);
        if (!hit) {
            traj.escaped = true;
            return;
        }
        Vec<D> nhat = (1.0 / cfg.r) * hit->point;
        auto w = detail::frame_coords(frame, nhat);
        Vec<D> v_out = scatter(cfg, hit->point, v);
        frame = frame * detail::scatter_of<D>(w, cfg.model);
        if constexpr (D == 2)
            frame = frame_rotation(v_out);
        else if ((traj.path_len.size() + 1) % 10000 == 0)
            frame = reorthonormalize(frame);
        Vec<D> out_point = hit->point;
        ImpactParam<D> w_exit;
        if (cfg.model.kind() == ScatterKind::HardSphere) {
            Vec<D> s = nhat - dot(nhat, v_out) * v_out;
            w_exit = detail::frame_coords(frame, s);
        } else {
            w_exit = w;
            Vec<D> s{};
            if constexpr (D == 2)
                s = w * perp(v_out);
            out_point = exit_point<D>(cfg.r, s, v_out);
        }
        traj.centers.push_back(hit->center);
        traj.q.push_back(out_point);
        traj.v.push_back(v_out);
        traj.path_len.push_back(hit->length);
        traj.w_impact.push_back(w);
        traj.w_exit.push_back(w_exit);
        start = Position<D>{hit->center, out_point};
        exclude = hit->center;
        v = v_out;
    }
}

/// Deterministic function of (config, seed, index).
template <std::size_t D>
BilliardTrajectory<D> simulate_billiard(const BilliardConfig<D> &cfg, long n_collisions, const Vec<D> &v0,
                                        std::uint64_t seed, std::uint64_t index)
{
    cfg.validate();
    if (n_collisions < 1)
        throw std::invalid_argument("simulate_billiard: need at least one collision");
    auto rng = rng_stream(seed, index);
    auto [q0, s0] = sample_boundary_init(cfg, v0, rng);
    BilliardTrajectory<D> traj;
    traj.seed = seed;
    traj.index = index;
    traj.centers.reserve(n_collisions + 1);
    traj.q.reserve(n_collisions + 1);
    traj.v.reserve(n_collisions + 1);
    traj.path_len.reserve(n_collisions);
    traj.w_impact.reserve(n_collisions);
    traj.w_exit.reserve(n_collisions + 1);
    Vec<D> v = normalized(v0);
    traj.centers.push_back(Cell<D>{});
    traj.q.push_back(q0);
    traj.v.push_back(v);
    traj.w_exit.push_back(s0);
    continue_trajectory(cfg, traj, Position<D>{Cell<D>{}, q0}, v, frame_rotation(v), n_collisions);
    return traj;
}

template <std::size_t D>
struct KernelSample {
    ImpactParam<D> w;
    double xi;
    ImpactParam<D> z;
};

/// (eta_{j-1}, xi_j, eta_j) for consecutive collisions, eta taken as the exit
/// parameter of the previous collision and the impact parameter of the next.
template <std::size_t D>
std::vector<KernelSample<D>> kernel_samples(const BilliardTrajectory<D> &traj)
{
    std::vector<KernelSample<D>> out;
    out.reserve(traj.path_len.size());
    for (std::size_t j = 0; j < traj.path_len.size(); ++j)
        out.push_back({traj.w_exit[j], traj.path_len[j], traj.w_impact[j]});
    return out;
}

/// Exact mean free path of the finite-r billiard from the area/perimeter
/// (Santalo) formula on one cell: 2D (1 - pi r)/2, 3D (1 - 4 pi r / 3)/pi.
inline double santalo_mean_free_path(int d, double r)
{
    if (d == 2)
        return (1.0 - pi * r) / 2.0;
    return (1.0 - 4.0 * pi * r / 3.0) / pi;
}

/// Columns j, xi, w_impact, w_exit, vx, vy, qx, qy, cx, cy (d = 2); the j = 0
/// row is the starting exit point with xi = 0 and w_impact = 0.
inline void write_csv(std::ostream &out, const BilliardConfig<2> &cfg, const BilliardTrajectory<2> &traj)
{
    CsvWriter w(out);
    w.header({"j", "xi", "w_impact", "w_exit", "vx", "vy", "qx", "qy", "cx", "cy"});
    for (std::size_t j = 0; j < traj.q.size(); ++j) {
        Vec<2> qa = cell_center(cfg, traj.centers[j]) + traj.q[j];
        w.cell(j).cell(j == 0 ? 0.0 : traj.path_len[j - 1]).cell(j == 0 ? 0.0 : traj.w_impact[j - 1]);
        w.cell(traj.w_exit[j]).cell(traj.v[j][0]).cell(traj.v[j][1]).cell(qa[0]).cell(qa[1]);
        w.cell(static_cast<long long>(traj.centers[j][0])).cell(static_cast<long long>(traj.centers[j][1]));
        w.end_row();
    }
}

} // namespace lorentz::billiard
