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
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "lorentz/constants.hpp"
#include "lorentz/csv.hpp"
#include "lorentz/errors.hpp"
#include "lorentz/kernel2d.hpp"
#include "lorentz/rng.hpp"
#include "lorentz/scattering.hpp"
#include "lorentz/vec.hpp"

/// The limiting random flight process in d = 2: the Markov chain
/// (xi_n, eta_n), positions Q_n, times tau_n, and truncation diagnostics.
namespace lorentz::flight {

inline constexpr double default_gamma = 1.5;
inline constexpr std::size_t default_memory_cap = 100'000'000;

struct ChainState {
    double eta = 0.0;
    Vec<2> v{1.0, 0.0};
    Vec<2> q{0.0, 0.0};
    double tau = 0.0;
    long n = 0;
    /// Last flight length xi_n (0 before the first step).
    double xi = 0.0;
    RotationAccumulator<2> frame{};
};

/// State before the first collision: at the origin, moving along v0, with
/// frame R(v0).
inline ChainState initial_state(const Vec<2> &v0, double eta0 = 0.0)
{
    ChainState s;
    s.eta = eta0;
    s.v = normalized(v0);
    s.frame = RotationAccumulator<2>(frame_rotation(v0));
    return s;
}

/// Moves the particle a distance xi along v, then scatters with parameter z.
inline void apply_step(ChainState &s, double xi, double z, const ScatterModel &model)
{
    s.q = s.q + xi * s.v;
    s.tau += xi;
    s.frame.apply(scatter_matrix(z, model));
    s.v = s.frame.direction();
    s.eta = z;
    s.xi = xi;
    ++s.n;
}

/// One transition: z ~ K0(eta, .), xi ~ Psi0(eta, ., z) / K0(eta, z).
template <class Rng>
ChainState advance(ChainState s, const ScatterModel &model, Rng &rng)
{
    double z = kernel2d::sample_eta_given(s.eta, rng);
    double xi = kernel2d::sample_xi_given(s.eta, z, rng);
    apply_step(s, xi, z, model);
    return s;
}

/// Runs n collisions from the initial law, calling obs(state) after each one
/// (and once with the initial state, n = 0). Storage is up to the observer.
template <class Rng, class Observer>
ChainState run_chain(long n, const kernel2d::InitialLaw &init, const Vec<2> &v0, const ScatterModel &model,
                     Rng &rng, Observer &&obs)
{
    if (n < 1)
        throw std::invalid_argument("run_chain: need at least one step");
    auto first = kernel2d::sample_initial(init, rng);
    ChainState s = initial_state(v0, first.eta0);
    obs(s);
    apply_step(s, first.xi, first.eta1, model);
    obs(s);
    for (long j = 2; j <= n; ++j) {
        s = advance(std::move(s), model, rng);
        obs(s);
    }
    return s;
}

/// Per-collision record of one realization. xi has n entries (xi_1..xi_n);
/// the other arrays have n + 1 (index 0 is the initial state).
struct Trajectory {
    std::vector<double> xi;
    std::vector<double> eta;
    std::vector<Vec<2>> v;
    std::vector<Vec<2>> q;
    std::vector<double> tau;
    std::uint64_t seed = 0;
    std::uint64_t index = 0;

    long steps() const { return static_cast<long>(xi.size()); }
};

/// Deterministic function of (seed, index, arguments).
inline Trajectory simulate(long n, const kernel2d::InitialLaw &init, const Vec<2> &v0, const ScatterModel &model,
                           std::uint64_t seed, std::uint64_t index, std::size_t memory_cap = default_memory_cap)
{
    if (n < 1)
        throw std::invalid_argument("simulate: need n >= 1");
    if (static_cast<std::size_t>(n) > memory_cap)
        throw resource_error("simulate: " + std::to_string(n) + " steps exceed the memory cap of " +
                             std::to_string(memory_cap) + "; use streaming mode");
    Trajectory t;
    t.seed = seed;
    t.index = index;
    t.xi.reserve(n);
    t.eta.reserve(n + 1);
    t.v.reserve(n + 1);
    t.q.reserve(n + 1);
    t.tau.reserve(n + 1);
    auto rng = rng_stream(seed, index);
    run_chain(n, init, v0, model, rng, [&t](const ChainState &s) {
        if (s.n > 0)
            t.xi.push_back(s.xi);
        t.eta.push_back(s.eta);
        t.v.push_back(s.v);
        t.q.push_back(s.q);
        t.tau.push_back(s.tau);
    });
    return t;
}

/// Streaming summary: final state plus the positions at requested checkpoints.
struct StreamSummary {
    ChainState final_state;
    std::vector<long> checkpoints;
    std::vector<Vec<2>> q_at;
    std::vector<double> tau_at;
};

/// Same law and random stream as simulate(), retaining only running values;
/// intended for n beyond the in-memory cap.
inline StreamSummary simulate_streaming(long n, const kernel2d::InitialLaw &init, const Vec<2> &v0,
                                        const ScatterModel &model, std::uint64_t seed, std::uint64_t index,
                                        std::vector<long> checkpoints = {})
{
    std::sort(checkpoints.begin(), checkpoints.end());
    StreamSummary out;
    out.checkpoints = checkpoints;
    std::size_t next = 0;
    auto rng = rng_stream(seed, index);
    out.final_state = run_chain(n, init, v0, model, rng, [&](const ChainState &s) {
        while (next < checkpoints.size() && checkpoints[next] == s.n) {
            out.q_at.push_back(s.q);
            out.tau_at.push_back(s.tau);
            ++next;
        }
    });
    return out;
}

/// X_t = Q_nu + (t - tau_nu) V_nu with nu = max{n : tau_n <= t}.
inline Vec<2> position_at(const Trajectory &traj, double t)
{
    if (traj.tau.empty() || !(t >= 0.0))
        throw std::out_of_range("position_at: t must be >= 0");
    if (t > traj.tau.back())
        throw std::out_of_range("position_at: t beyond the last collision time");
    auto it = std::upper_bound(traj.tau.begin(), traj.tau.end(), t);
    std::size_t nu = static_cast<std::size_t>(it - traj.tau.begin()) - 1;
    double dt = t - traj.tau[nu];
    if (dt == 0.0)
        return traj.q[nu];
    return traj.q[nu] + dt * traj.v[nu];
}

/// sqrt(n log n) scaling for the discrete-time displacement.
inline double superdiffusive_scale(long n) { return std::sqrt(sigma_sq(2)) * std::sqrt(double(n) * std::log(double(n))); }

/// Y_n(t): the piecewise linear path through Q_0..Q_n at times k/n, divided
/// by sigma_2 sqrt(n log n).
inline Vec<2> interpolated_path(const Trajectory &traj, long n, double t)
{
    if (n < 3)
        throw std::out_of_range("interpolated_path: need n >= 3");
    if (n > traj.steps())
        throw std::out_of_range("interpolated_path: n exceeds the trajectory length");
    if (!(t >= 0.0 && t <= 1.0))
        throw std::out_of_range("interpolated_path: t must lie in [0, 1]");
    double nt = double(n) * t;
    long k = std::min(static_cast<long>(std::floor(nt)), n);
    double frac = nt - double(k);
    Vec<2> p = traj.q[k];
    if (k < n && frac > 0.0)
        p = p + frac * (traj.q[k + 1] - traj.q[k]);
    return (1.0 / superdiffusive_scale(n)) * p;
}

/// r_j = sqrt(j (log j)^gamma) for j >= 3, and 0 for j = 1, 2.
inline double truncation_radius(long j, double gamma)
{
    if (j < 3)
        return 0.0;
    double lj = std::log(double(j));
    return std::sqrt(double(j) * std::pow(lj, gamma));
}

/// Index j runs 1..n at array position j - 1, except the n + 1 running
/// displacements q_prime and q_tilde, which start at Q_0 = 0.
struct TruncationDiagnostics {
    double gamma = default_gamma;
    std::vector<double> r;
    std::vector<double> m;
    std::vector<double> a2;
    std::vector<double> A2;
    std::vector<double> xi_prime;
    std::vector<double> xi_tilde;
    std::vector<Vec<2>> q_prime;
    std::vector<Vec<2>> q_tilde;
};

/// Conditional moments of the truncated flight length given (eta_{j-1}, eta_j).
struct TruncatedStep {
    double r;
    double m;
    double a2;
};

inline TruncatedStep truncated_step(long j, double gamma, double w, double z)
{
    double r = truncation_radius(j, gamma);
    if (r == 0.0)
        return {0.0, 0.0, 0.0};
    auto k0 = kernel2d::moments(w, z).k0;
    auto t = kernel2d::moments_truncated(w, z, r);
    double m = t.k1r / k0;
    double a2 = std::max(0.0, t.k2r / k0 - m * m);
    return {r, m, a2};
}

inline void check_gamma(double gamma)
{
    if (!(gamma > 1.0 && gamma < 2.0))
        throw std::domain_error("truncation: gamma must lie in (1, 2)");
}

inline TruncationDiagnostics truncation_diagnostics(const Trajectory &traj, double gamma = default_gamma)
{
    check_gamma(gamma);
    long n = traj.steps();
    if (n < 3)
        throw std::out_of_range("truncation_diagnostics: trajectory needs >= 3 steps");
    TruncationDiagnostics d;
    d.gamma = gamma;
    d.q_prime.push_back({0.0, 0.0});
    d.q_tilde.push_back({0.0, 0.0});
    double A2 = 0.0, comp = 0.0;
    for (long j = 1; j <= n; ++j) {
        auto st = truncated_step(j, gamma, traj.eta[j - 1], traj.eta[j]);
        double xi = traj.xi[j - 1];
        double xp = xi <= st.r ? xi : 0.0;
        double xt = xp - st.m;
        // Kahan-compensated running sum of a_j^2
        double y = st.a2 - comp;
        double t = A2 + y;
        comp = (t - A2) - y;
        A2 = t;
        d.r.push_back(st.r);
        d.m.push_back(st.m);
        d.a2.push_back(st.a2);
        d.A2.push_back(A2);
        d.xi_prime.push_back(xp);
        d.xi_tilde.push_back(xt);
        d.q_prime.push_back(d.q_prime.back() + xp * traj.v[j - 1]);
        d.q_tilde.push_back(d.q_tilde.back() + xt * traj.v[j - 1]);
    }
    return d;
}

/// Streaming counterpart of truncation_diagnostics: Q_n, the centered
/// truncated displacement and A_n^2 at the requested checkpoints only.
struct TruncatedStream {
    std::vector<long> checkpoints;
    std::vector<Vec<2>> q_at;
    std::vector<Vec<2>> q_tilde_at;
    std::vector<double> A2_at;
};

inline TruncatedStream simulate_truncated_streaming(long n, const kernel2d::InitialLaw &init, const Vec<2> &v0,
                                                    const ScatterModel &model, std::uint64_t seed,
                                                    std::uint64_t index, std::vector<long> checkpoints,
                                                    double gamma = default_gamma)
{
    check_gamma(gamma);
    std::sort(checkpoints.begin(), checkpoints.end());
    TruncatedStream out;
    out.checkpoints = checkpoints;
    std::size_t next = 0;
    double prev_eta = 0.0, A2 = 0.0, comp = 0.0;
    Vec<2> prev_v{}, qt{0.0, 0.0};
    auto rng = rng_stream(seed, index);
    run_chain(n, init, v0, model, rng, [&](const ChainState &s) {
        if (s.n > 0) {
            auto st = truncated_step(s.n, gamma, prev_eta, s.eta);
            double xt = (s.xi <= st.r ? s.xi : 0.0) - st.m;
            double y = st.a2 - comp;
            double t = A2 + y;
            comp = (t - A2) - y;
            A2 = t;
            qt = qt + xt * prev_v;
        }
        prev_eta = s.eta;
        prev_v = s.v;
        while (next < checkpoints.size() && checkpoints[next] == s.n) {
            out.q_at.push_back(s.q);
            out.q_tilde_at.push_back(qt);
            out.A2_at.push_back(A2);
            ++next;
        }
    });
    return out;
}

/// Columns j, xi, eta, vx, vy, qx, qy, tau; the j = 0 row has xi = 0.
inline void write_csv(std::ostream &out, const Trajectory &traj)
{
    CsvWriter w(out);
    w.header({"j", "xi", "eta", "vx", "vy", "qx", "qy", "tau"});
    for (std::size_t j = 0; j < traj.q.size(); ++j) {
        w.cell(j).cell(j == 0 ? 0.0 : traj.xi[j - 1]).cell(traj.eta[j]);
        w.cell(traj.v[j][0]).cell(traj.v[j][1]).cell(traj.q[j][0]).cell(traj.q[j][1]).cell(traj.tau[j]);
        w.end_row();
    }
}

} // namespace lorentz::flight
