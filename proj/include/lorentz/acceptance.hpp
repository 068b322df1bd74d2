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

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lorentz/billiard.hpp"
#include "lorentz/config.hpp"
#include "lorentz/constants.hpp"
#include "lorentz/csv.hpp"
#include "lorentz/ensemble.hpp"
#include "lorentz/flight.hpp"
#include "lorentz/kernel2d.hpp"
#include "lorentz/oracle.hpp"
#include "lorentz/output.hpp"
#include "lorentz/report.hpp"
#include "lorentz/rng.hpp"
#include "lorentz/scattering.hpp"
#include "lorentz/spectral.hpp"
#include "lorentz/special.hpp"
#include "lorentz/stats.hpp"

/// The numbered acceptance gates, their sample sizes, and the verify run
/// that writes gates.json, manifest.json and the supporting tables.
namespace lorentz::acceptance {

/// Sample sizes. "full" is the published scale; "quick" is for smoke and
/// determinism runs, with the same thresholds.
struct Profile {
    std::string name;
    long moment_cases;
    long invariant_points;
    int normalization_w;
    long sampler_draws;
    long eta_chains;
    int eta_chain_length;
    long xi_tail_draws;
    long mu_tail_draws;
    long clt_trajectories;
    long clt_steps;
    long angle_steps;
    long growth_trajectories;
    long growth_steps;
    long mfp_collisions;
    long mfp_per_trajectory;
    long histogram_samples;
    long histogram_per_trajectory;
    int spectral_m_lo;
    int spectral_m_hi;
    long mixing_steps;
    int mixing_lags;
    long identity_trajectories;
    long identity_steps;
    long specular_cases;
};

inline Profile full_profile()
{
    return {"full",   1000,    1000000, 100,     1000000, 1000000, 100,     10000000, 100000000,
            10000,    10000,   1000,    1000,    100000,  1000000, 100000,  10000000, 100000,
            200,      400,     1000000, 30,      100,     10000,   100000};
}

inline Profile quick_profile()
{
    return {"quick", 100,   20000, 100,    20000, 5000,  100,   200000, 1000000, 400,  1000, 100,
            40,      10000, 50000, 10000,  50000, 10000, 50,    100,    50000,   30,   10,   1000,
            5000};
}

inline Profile profile_named(const std::string &name)
{
    if (name == "full")
        return full_profile();
    if (name == "quick")
        return quick_profile();
    throw config_error("unknown verify profile '" + name + "'");
}

struct GateResult {
    int id = 0;
    std::string name;
    bool pass = false;
    nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
    /// Wall time; printed, never written to files.
    double seconds = 0.0;
};

struct Context {
    Context(ExperimentConfig config, Profile profile, unsigned workers)
        : cfg(std::move(config)), prof(std::move(profile)), threads(workers)
    {
    }

    ExperimentConfig cfg;
    Profile prof;
    unsigned threads = 0;
    FileMap files;
    std::optional<double> omega0;

    /// Stream for item i of sub-test tag; independent of scheduling.
    RandomStream stream(std::uint64_t tag, std::uint64_t i) const { return rng_stream(cfg.seed, (tag << 40) + i); }

    kernel2d::InitialLaw initial_law() const
    {
        if (cfg.initial == "stationary_discrete")
            return kernel2d::StationaryDiscrete{};
        return kernel2d::StationaryContinuous{};
    }
};

namespace detail {

/// v[i] = one(i) for i in [0, n), in blocks over the worker pool.
template <class T, class Fn>
std::vector<T> fill(std::size_t n, unsigned threads, Fn &&one, std::size_t block = 4096)
{
    std::vector<T> v(n);
    parallel_for((n + block - 1) / block, threads, [&](std::size_t b) {
        for (std::size_t i = b * block; i < std::min(n, (b + 1) * block); ++i)
            v[i] = one(i);
    });
    return v;
}

inline double vmax(const std::vector<double> &v)
{
    double m = 0.0;
    for (double x : v)
        m = std::max(m, x);
    return m;
}

inline double uniform_cdf(double x) { return std::clamp(0.5 * (x + 1.0), 0.0, 1.0); }

inline double rel_err(double v, double target) { return std::abs(v - target) / std::abs(target); }

/// Counts above each threshold, mergeable.
struct TailTally {
    std::vector<double> grid;
    std::vector<std::uint64_t> above;
    std::uint64_t n = 0;

    TailTally() = default;
    explicit TailTally(std::vector<double> g) : grid(std::move(g)), above(grid.size(), 0) {}

    void add(double x)
    {
        ++n;
        for (std::size_t k = 0; k < grid.size(); ++k)
            above[k] += x > grid[k];
    }

    void merge(const TailTally &o)
    {
        for (std::size_t k = 0; k < above.size() && k < o.above.size(); ++k)
            above[k] += o.above[k];
        n += o.n;
    }

    std::vector<stats::TailRow> rows() const
    {
        std::vector<stats::TailRow> out;
        for (std::size_t k = 0; k < grid.size(); ++k)
            out.push_back(stats::tail_row(grid[k], above[k], n));
        return out;
    }
};

inline std::string tail_csv(const std::vector<stats::TailRow> &rows)
{
    std::ostringstream o;
    CsvWriter w(o);
    w.header({"u", "survival", "u2_survival", "u2_logu_survival"});
    for (const auto &r : rows)
        w.row({r.u, r.survival, r.u2_survival, r.u2_logu_survival});
    return o.str();
}

inline nlohmann::ordered_json tail_json(const stats::TailRow &r)
{
    return {{"u", r.u}, {"survival", r.survival}, {"u2_survival", r.u2_survival},
            {"u2_logu_survival", r.u2_logu_survival}};
}

/// Uniform direction on the circle.
inline Vec<2> random_direction(RandomStream &rng)
{
    double phi = uniform_open(rng, -pi, pi);
    return {std::cos(phi), std::sin(phi)};
}

} // namespace detail

/// 1. Closed-form moments against quadrature of x^p psi0.
inline GateResult gate_moments(Context &c)
{
    GateResult g{1, "closed-form moments vs quadrature"};
    auto t0 = std::chrono::steady_clock::now();
    auto err = detail::fill<double>(
        c.prof.moment_cases, c.threads,
        [&](std::size_t i) {
            auto rng = c.stream(0x10, i);
            double w = uniform_open(rng, -1.0, 1.0), z = uniform_open(rng, -1.0, 1.0);
            double r = uniform_open(rng, 0.0, 1.25) * oracle::x_breaks(w, z).back();
            auto full = kernel2d::moments(w, z);
            auto trunc = kernel2d::moments_truncated(w, z, r);
            double f[3] = {full.k0, full.k1, full.k2}, t[3] = {trunc.k0r, trunc.k1r, trunc.k2r};
            double e = 0.0;
            for (int p = 0; p < 3; ++p) {
                e = std::max(e, std::abs(f[p] - oracle::moment(w, z, p)));
                e = std::max(e, std::abs(t[p] - oracle::moment(w, z, p, r)));
            }
            return e;
        },
        16);
    g.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    double worst = detail::vmax(err);
    g.metrics["cases"] = c.prof.moment_cases;
    g.metrics["max_abs_error"] = worst;
    g.metrics["tolerance"] = c.cfg.gates.moment_tol;
    g.metrics["time_limit_seconds"] = c.cfg.gates.moment_seconds;
    g.pass = worst <= c.cfg.gates.moment_tol && g.seconds < c.cfg.gates.moment_seconds;
    g.metrics["within_time_limit"] = g.seconds < c.cfg.gates.moment_seconds;
    return g;
}

/// 2. Symmetry, bounds and normalization of the kernel.
inline GateResult gate_invariants(Context &c)
{
    GateResult g{2, "kernel symmetry, bounds, normalization"};
    struct Check {
        std::uint64_t asym = 0, upper = 0, lower = 0, negative = 0;
        double point_sym = 0.0;
        void merge(const Check &o)
        {
            asym += o.asym;
            upper += o.upper;
            lower += o.lower;
            negative += o.negative;
            point_sym = std::max(point_sym, o.point_sym);
        }
    };
    const double slack = c.cfg.gates.bound_slack;
    auto chk = parallel_reduce<Check>(
        c.prof.invariant_points, c.threads,
        [&](Check &acc, std::size_t i) {
            auto rng = c.stream(0x20, i);
            double w = uniform_open(rng, -1.0, 1.0), z = uniform_open(rng, -1.0, 1.0);
            double x = uniform_open(rng, 0.0, 1.2) * oracle::x_breaks(w, z).back();
            double p = kernel2d::psi0(w, x, z);
            acc.asym += p != kernel2d::psi0(z, x, w);
            acc.negative += p < 0.0;
            acc.upper += p > kernel_peak + slack;
            double lb = (1.0 - 4.0 * x) * kernel_peak;
            acc.lower += lb > 0.0 && p < lb - slack;
            acc.point_sym = std::max(acc.point_sym, std::abs(p - kernel2d::psi0(-w, x, -z)));
        },
        4096);
    auto gl = gauss_legendre(c.prof.normalization_w);
    auto norm_err = detail::fill<double>(
        gl.nodes.size(), c.threads, [&](std::size_t i) { return std::abs(oracle::eta_mass(gl.nodes[i], -1.0, 1.0) - 1.0); },
        1);
    double worst_norm = detail::vmax(norm_err);
    g.metrics["points"] = c.prof.invariant_points;
    g.metrics["symmetry_violations"] = chk.asym;
    g.metrics["negative_values"] = chk.negative;
    g.metrics["upper_bound_violations"] = chk.upper;
    g.metrics["lower_bound_violations"] = chk.lower;
    g.metrics["point_symmetry_max_diff"] = chk.point_sym;
    g.metrics["normalization_w_nodes"] = c.prof.normalization_w;
    g.metrics["normalization_max_error"] = worst_norm;
    g.pass = chk.asym == 0 && chk.negative == 0 && chk.upper == 0 && chk.lower == 0 &&
             worst_norm <= c.cfg.gates.normalization_tol;
    return g;
}

/// 3. Sampler chi-square and KS gates.
inline GateResult gate_samplers(Context &c)
{
    GateResult g{3, "conditional samplers and stationarity"};
    const int bins = 200;
    const double crit = stats::chi_square_quantile(bins - 1, c.cfg.gates.chi2_percentile);
    const std::size_t n = c.prof.sampler_draws;
    bool pass = true;
    std::ostringstream table;
    CsvWriter csv(table);
    csv.header({"test", "w", "z", "draws", "statistic", "threshold"});

    auto eta_cases = nlohmann::ordered_json::array();
    int tag = 0;
    for (double w : {-0.95, 0.0, 0.5, 0.9}) {
        auto edges = oracle::eta_equal_mass_edges(w, bins);
        auto draws = detail::fill<double>(n, c.threads, [&, tag](std::size_t i) {
            auto rng = c.stream(0x30 + tag, i);
            return kernel2d::sample_eta_given(w, rng);
        });
        double chi2 = stats::chi_square_edges(draws, edges);
        pass = pass && chi2 <= crit;
        eta_cases.push_back({{"w", w}, {"chi2", chi2}});
        csv.cell("eta_given_w").cell(w).cell("").cell(std::size_t(n)).cell(chi2).cell(crit);
        csv.end_row();
        ++tag;
    }
    auto xi_cases = nlohmann::ordered_json::array();
    for (auto [w, z] : {std::pair{0.5, 0.0}, {-0.3, 0.7}, {0.9, -0.95}, {-0.6, -0.2}}) {
        auto edges = oracle::xi_equal_mass_edges(w, z, bins);
        auto draws = detail::fill<double>(n, c.threads, [&, tag](std::size_t i) {
            auto rng = c.stream(0x30 + tag, i);
            return kernel2d::sample_xi_given(w, z, rng);
        });
        double chi2 = stats::chi_square_edges(draws, edges);
        pass = pass && chi2 <= crit;
        xi_cases.push_back({{"w", w}, {"z", z}, {"chi2", chi2}});
        csv.cell("xi_given_wz").cell(w).cell(z).cell(std::size_t(n)).cell(chi2).cell(crit);
        csv.end_row();
        ++tag;
    }

    auto eta1 = detail::fill<double>(n, c.threads, [&](std::size_t i) {
        auto rng = c.stream(0x3a, i);
        return kernel2d::sample_initial(kernel2d::StationaryDiscrete{}, rng).eta1;
    });
    double ks_eta1 = stats::ks_statistic(std::move(eta1), detail::uniform_cdf);
    pass = pass && ks_eta1 <= c.cfg.gates.ks_discrete;
    csv.cell("eta1_uniform_ks").cell("").cell("").cell(std::size_t(n)).cell(ks_eta1).cell(c.cfg.gates.ks_discrete);
    csv.end_row();

    // chains of eta_0 .. eta_L from the discrete stationary start; xi_1 and
    // xi_L are kept for a two-sample comparison
    const std::size_t chains = c.prof.eta_chains;
    const int len = c.prof.eta_chain_length;
    std::vector<double> eta_last(chains), xi_first(chains), xi_last(chains);
    parallel_for((chains + 1023) / 1024, c.threads, [&](std::size_t b) {
        for (std::size_t i = b * 1024; i < std::min(chains, (b + 1) * 1024); ++i) {
            auto rng = c.stream(0x3b, i);
            auto first = kernel2d::sample_initial(kernel2d::StationaryDiscrete{}, rng);
            double prev = first.eta1, eta = first.eta1;
            for (int k = 2; k <= len; ++k) {
                prev = eta;
                eta = kernel2d::sample_eta_given(prev, rng);
            }
            eta_last[i] = eta;
            xi_first[i] = first.xi;
            xi_last[i] = kernel2d::sample_xi_given(prev, eta, rng);
        }
    });
    double ks_last = stats::ks_statistic(std::move(eta_last), detail::uniform_cdf);
    double ks_xi = stats::ks_two_sample(std::move(xi_first), std::move(xi_last));
    pass = pass && ks_last <= c.cfg.gates.ks_eta100;
    csv.cell("eta_L_uniform_ks").cell("").cell("").cell(chains).cell(ks_last).cell(c.cfg.gates.ks_eta100);
    csv.end_row();
    csv.cell("xi_1_vs_xi_L_two_sample_ks").cell("").cell("").cell(chains).cell(ks_xi).cell("");
    csv.end_row();

    g.metrics["draws_per_test"] = n;
    g.metrics["chi2_threshold"] = crit;
    g.metrics["eta_given_w"] = eta_cases;
    g.metrics["xi_given_wz"] = xi_cases;
    g.metrics["discrete_eta_ks"] = ks_eta1;
    g.metrics["chain_length"] = len;
    g.metrics["chains"] = chains;
    g.metrics["eta_L_ks"] = ks_last;
    g.metrics["xi_1_vs_xi_L_ks"] = ks_xi;
    g.pass = pass;
    c.files["sampler_tests.csv"] = table.str();
    return g;
}

/// 4. x^2 P(xi > x) at x = 20 for stationary free paths.
inline GateResult gate_xi_tail(Context &c)
{
    GateResult g{4, "free-path tail constant"};
    std::vector<double> grid{2.0, 5.0, 10.0, 20.0, 50.0};
    auto tally = parallel_reduce<detail::TailTally>(
        c.prof.xi_tail_draws, c.threads,
        [&](detail::TailTally &t, std::size_t i) {
            auto rng = c.stream(0x40, i);
            t.add(kernel2d::sample_initial(kernel2d::StationaryDiscrete{}, rng).xi);
        },
        4096, detail::TailTally(grid));
    auto rows = tally.rows();
    const double target = tail_constant(2) / 2.0;
    const auto &at20 = rows[3];
    double rel = detail::rel_err(at20.u2_survival, target);
    g.metrics["draws"] = c.prof.xi_tail_draws;
    g.metrics["target"] = target;
    g.metrics["at_20"] = detail::tail_json(at20);
    g.metrics["relative_error"] = rel;
    g.pass = rel <= c.cfg.gates.xi_tail_rel;
    c.files["xi_tail.csv"] = detail::tail_csv(rows);
    return g;
}

/// 5. u^2 log(u) P(mu > u) at u = 30 for mu = K1 / K0 under (w uniform, z | w).
inline GateResult gate_mu_tail(Context &c)
{
    GateResult g{5, "conditional-mean tail constant"};
    std::vector<double> grid{5.0, 10.0, 20.0, 30.0, 100.0};
    auto tally = parallel_reduce<detail::TailTally>(
        c.prof.mu_tail_draws, c.threads,
        [&](detail::TailTally &t, std::size_t i) {
            auto rng = c.stream(0x50, i);
            double w = uniform_open(rng, -1.0, 1.0);
            double z = kernel2d::sample_eta_given(w, rng);
            auto m = kernel2d::moments(w, z);
            t.add(m.k1 / m.k0);
        },
        4096, detail::TailTally(grid));
    auto rows = tally.rows();
    const double target = mean_tail_constant_2d;
    const auto &at30 = rows[3];
    double rel = detail::rel_err(at30.u2_logu_survival, target);
    g.metrics["draws"] = c.prof.mu_tail_draws;
    g.metrics["target"] = target;
    g.metrics["at_30"] = detail::tail_json(at30);
    g.metrics["relative_error"] = rel;
    g.pass = rel <= c.cfg.gates.mu_tail_rel;
    c.files["mu_tail.csv"] = detail::tail_csv(rows);
    return g;
}

/// 6. Gaussianity of normalized endpoints and isotropy of directions.
inline GateResult gate_clt(Context &c)
{
    GateResult g{6, "superdiffusive CLT at desk scale"};
    const long n = c.prof.clt_steps, na = c.prof.angle_steps;
    const std::size_t m = c.prof.clt_trajectories;
    std::vector<Vec<2>> end(m), mid(m);
    auto law = c.initial_law();
    parallel_for(m, c.threads, [&](std::size_t i) {
        auto s = flight::simulate_streaming(n, law, {1.0, 0.0}, ScatterModel::hard_sphere(), c.cfg.seed,
                                            (std::uint64_t(0x60) << 40) + i, {na, n});
        mid[i] = s.q_at[0];
        end[i] = s.q_at[1];
    });
    double scale = flight::superdiffusive_scale(n);
    auto rep = stats::gaussian_summary<2>(end, scale);
    rep.seed = c.cfg.seed;
    rep.config_hash = fnv1a_hex(c.cfg.canonical());
    std::vector<double> angles(m);
    for (std::size_t i = 0; i < m; ++i)
        angles[i] = std::atan2(mid[i][1], mid[i][0]);
    double ks_angle = stats::ks_statistic(angles, [](double a) { return (a + pi) / (2.0 * pi); });
    double cov_dev = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            cov_dev = std::max(cov_dev, std::abs(rep.covariance[i][j] - (i == j ? 1.0 : 0.0)));
    double ks = std::max(rep.ks_per_component[0], rep.ks_per_component[1]);
    g.metrics["trajectories"] = m;
    g.metrics["steps"] = n;
    g.metrics["scale"] = scale;
    g.metrics["ks_per_component"] = rep.ks_per_component;
    g.metrics["covariance"] = rep.covariance;
    g.metrics["covariance_max_deviation"] = cov_dev;
    g.metrics["angle_steps"] = na;
    g.metrics["angle_ks"] = ks_angle;
    bool ks_ok = ks <= c.cfg.gates.clt_ks, cov_ok = cov_dev <= c.cfg.gates.clt_cov_rel,
         angle_ok = ks_angle <= c.cfg.gates.angle_ks;
    g.metrics["ks_pass"] = ks_ok;
    g.metrics["covariance_pass"] = cov_ok;
    g.metrics["angle_pass"] = angle_ok;
    g.pass = ks_ok && cov_ok && angle_ok;
    std::ostringstream o;
    CsvWriter w(o);
    w.header({"index", "qx_angle_steps", "qy_angle_steps", "qx", "qy"});
    for (std::size_t i = 0; i < m; ++i) {
        w.cell(i).cell(mid[i][0]).cell(mid[i][1]).cell(end[i][0]).cell(end[i][1]);
        w.end_row();
    }
    c.files["clt_endpoints.csv"] = o.str();
    c.files["clt_report.json"] = rep.to_json().dump(2) + "\n";
    return g;
}

/// 7. A_n^2 / (n ln n) and E|Q~_n|^2 / (n ln n) against 1 / (2 pi^2).
inline GateResult gate_growth(Context &c)
{
    GateResult g{7, "variance growth"};
    const long n = c.prof.growth_steps;
    std::vector<long> cps;
    for (long k = n / 100; k <= n; k *= 10)
        if (k >= 3)
            cps.push_back(k);
    if (cps.empty() || cps.back() != n)
        cps.push_back(n);
    const std::size_t m = c.prof.growth_trajectories;
    std::vector<flight::TruncatedStream> runs(m);
    auto law = c.initial_law();
    parallel_for(m, c.threads, [&](std::size_t i) {
        runs[i] = flight::simulate_truncated_streaming(n, law, {1.0, 0.0}, ScatterModel::hard_sphere(), c.cfg.seed,
                                                       (std::uint64_t(0x70) << 40) + i, cps, c.cfg.gamma);
    });
    stats::GrowthAccumulator acc(cps);
    stats::CompensatedSum a2sum;
    const double target = 2.0 * sigma_sq(2);
    const double nln = double(n) * std::log(double(n));
    std::size_t near = 0;
    for (const auto &r : runs) {
        acc.add(r.q_at, r.q_tilde_at);
        double a = r.A2_at.back() / nln;
        a2sum.add(a);
        near += detail::rel_err(a, target) <= c.cfg.gates.growth_rel;
    }
    auto rows = acc.rows();
    double a2 = a2sum.value() / double(m);
    double trunc = rows.back().truncated;
    g.metrics["trajectories"] = m;
    g.metrics["steps"] = n;
    g.metrics["target"] = target;
    g.metrics["A2_over_nlogn"] = a2;
    g.metrics["truncated_over_nlogn"] = trunc;
    g.metrics["raw_over_nlogn"] = rows.back().raw;
    g.metrics["fraction_of_trajectories_within_tolerance"] = double(near) / double(m);
    g.pass = detail::rel_err(a2, target) <= c.cfg.gates.growth_rel &&
             detail::rel_err(trunc, target) <= c.cfg.gates.growth_rel;
    std::ostringstream o;
    stats::write_csv(o, rows);
    c.files["growth.csv"] = o.str();
    return g;
}

/// 8. Billiard mean free path at r = 1e-3.
inline GateResult gate_mean_free_path(Context &c)
{
    GateResult g{8, "billiard mean free path"};
    billiard::BilliardConfig<2> cfg;
    cfg.r = 1e-3;
    const long per = c.prof.mfp_per_trajectory;
    const std::size_t m = std::max<long>(1, c.prof.mfp_collisions / per);
    struct Acc {
        stats::CompensatedSum sum;
        std::uint64_t count = 0, escapes = 0;
        void merge(const Acc &o)
        {
            sum.merge(o.sum);
            count += o.count;
            escapes += o.escapes;
        }
    };
    auto acc = parallel_reduce<Acc>(
        m, c.threads,
        [&](Acc &a, std::size_t i) {
            auto rng = c.stream(0x80, i);
            auto t = billiard::simulate_billiard(cfg, per, detail::random_direction(rng), c.cfg.seed,
                                                 (std::uint64_t(0x81) << 40) + i);
            for (double l : t.path_len)
                a.sum.add(l);
            a.count += t.path_len.size();
            a.escapes += t.escaped;
        },
        1);
    double mean = acc.sum.value() / double(acc.count);
    double santalo = billiard::santalo_mean_free_path(2, cfg.r);
    double limit = mean_free_path(2);
    g.metrics["r"] = cfg.r;
    g.metrics["collisions"] = acc.count;
    g.metrics["escapes"] = acc.escapes;
    g.metrics["mean_path"] = mean;
    g.metrics["santalo"] = santalo;
    g.metrics["limit"] = limit;
    g.metrics["relative_error_santalo"] = detail::rel_err(mean, santalo);
    g.metrics["relative_error_limit"] = detail::rel_err(mean, limit);
    g.pass = detail::rel_err(mean, santalo) <= c.cfg.gates.santalo_rel &&
             detail::rel_err(mean, limit) <= c.cfg.gates.limit_rel;
    return g;
}

/// 9. (w, xi, z) histogram of billiard collisions against kernel masses.
inline GateResult gate_histogram(Context &c)
{
    GateResult g{9, "Boltzmann-Grad histogram convergence"};
    std::vector<double> we, xe{0.0, 0.125, 0.25, 0.375, 0.5, 0.75, 1.0, 1.5, INFINITY};
    for (int k = 0; k <= 8; ++k)
        we.push_back(-1.0 + 0.25 * k);
    auto masses = oracle::histogram_masses(we, xe, we, 64);
    const std::size_t cells = masses.size();
    auto bin = [&](double v, const std::vector<double> &e) {
        std::size_t k = std::upper_bound(e.begin(), e.end(), v) - e.begin();
        return std::clamp<std::size_t>(k, 1, e.size() - 1) - 1;
    };
    struct Counts {
        std::vector<std::uint64_t> c;
        std::uint64_t escapes = 0;
        void merge(const Counts &o)
        {
            if (c.empty())
                c.assign(o.c.size(), 0);
            for (std::size_t k = 0; k < o.c.size(); ++k)
                c[k] += o.c[k];
            escapes += o.escapes;
        }
    };
    const long per = c.prof.histogram_per_trajectory;
    const std::size_t m = std::max<long>(1, c.prof.histogram_samples / per);
    auto rows = nlohmann::ordered_json::array();
    std::ostringstream o;
    CsvWriter w(o);
    w.header({"r", "samples", "tv"});
    std::vector<double> tvs;
    int tag = 0;
    for (double r : {1e-2, 1e-3, 1e-4}) {
        billiard::BilliardConfig<2> cfg;
        cfg.r = r;
        Counts init;
        init.c.assign(cells, 0);
        auto counts = parallel_reduce<Counts>(
            m, c.threads,
            [&, tag](Counts &a, std::size_t i) {
                auto rng = c.stream(0x90 + tag, i);
                auto t = billiard::simulate_billiard(cfg, per, detail::random_direction(rng), c.cfg.seed,
                                                     (std::uint64_t(0x98 + tag) << 40) + i);
                for (const auto &s : billiard::kernel_samples(t))
                    ++a.c[(bin(s.w, we) * 8 + bin(s.xi, xe)) * 8 + bin(s.z, we)];
                a.escapes += t.escaped;
            },
            1, init);
        std::uint64_t total = 0;
        for (auto k : counts.c)
            total += k;
        double tv = 0.0;
        for (std::size_t k = 0; k < cells; ++k)
            tv += std::abs(double(counts.c[k]) / double(total) - masses[k]);
        tv *= 0.5;
        tvs.push_back(tv);
        rows.push_back({{"r", r}, {"samples", total}, {"escapes", counts.escapes}, {"tv", tv}});
        w.cell(r).cell(std::size_t(total)).cell(tv);
        w.end_row();
        ++tag;
    }
    bool monotone = tvs[0] > tvs[1] && tvs[1] > tvs[2];
    g.metrics["bins"] = "8 x 8 x 8";
    g.metrics["runs"] = rows;
    g.metrics["monotone"] = monotone;
    g.pass = tvs.back() <= c.cfg.gates.histogram_tv && monotone;
    c.files["histogram_tv.csv"] = o.str();
    return g;
}

/// 10. Spectral gap estimate and grid stability.
inline GateResult gate_spectral(Context &c)
{
    GateResult g{10, "spectral gap"};
    auto lo = stats::spectral_gap(c.prof.spectral_m_lo);
    auto hi = stats::spectral_gap(c.prof.spectral_m_hi);
    c.omega0 = hi.omega;
    double bound = doeblin_bound(2);
    g.metrics["m"] = {c.prof.spectral_m_lo, c.prof.spectral_m_hi};
    g.metrics["omega"] = {lo.omega, hi.omega};
    g.metrics["iterations"] = {lo.iterations, hi.iterations};
    g.metrics["row_drift"] = {lo.row_drift, hi.row_drift};
    g.metrics["doeblin_bound"] = bound;
    g.metrics["grid_difference"] = std::abs(lo.omega - hi.omega);
    g.pass = lo.omega > 0.0 && hi.omega > 0.0 && std::max(lo.omega, hi.omega) <= bound + c.cfg.gates.spectral_slack &&
             std::abs(lo.omega - hi.omega) <= c.cfg.gates.spectral_stability;
    std::ostringstream o;
    CsvWriter w(o);
    w.header({"m", "omega", "iterations", "row_drift"});
    for (const auto *e : {&lo, &hi}) {
        w.cell(e == &lo ? c.prof.spectral_m_lo : c.prof.spectral_m_hi).cell(e->omega).cell(e->iterations);
        w.cell(e->row_drift);
        w.end_row();
    }
    c.files["spectral.csv"] = o.str();
    return g;
}

/// 11. Geometric decay of Cov(e1.V_0, e1.V_n) against the spectral estimate.
inline GateResult gate_mixing(Context &c)
{
    GateResult g{11, "velocity mixing rate"};
    if (!c.omega0)
        c.omega0 = stats::spectral_gap(c.prof.spectral_m_hi).omega;
    std::vector<double> series;
    series.reserve(c.prof.mixing_steps + 1);
    auto rng = c.stream(0xb0, 0);
    flight::run_chain(c.prof.mixing_steps, c.initial_law(), {1.0, 0.0}, ScatterModel::hard_sphere(), rng,
                      [&](const flight::ChainState &s) { series.push_back(s.v[0]); });
    auto ac = stats::autocovariance(series, c.prof.mixing_lags);
    double limit = *c.omega0 + c.cfg.gates.mixing_slack;
    g.metrics["steps"] = c.prof.mixing_steps;
    g.metrics["fitted_rate"] = ac.fit.rate;
    g.metrics["fit_points"] = ac.fit.points;
    g.metrics["fit_residual"] = ac.fit.residual;
    g.metrics["noise_floor"] = ac.noise_floor;
    g.metrics["omega0"] = *c.omega0;
    g.metrics["limit"] = limit;
    g.pass = ac.fit.points >= 2 && ac.fit.rate <= limit;
    std::ostringstream o;
    CsvWriter w(o);
    w.header({"lag", "autocovariance"});
    for (std::size_t k = 0; k < ac.acov.size(); ++k) {
        w.cell(k).cell(ac.acov[k]);
        w.end_row();
    }
    c.files["autocovariance.csv"] = o.str();
    return g;
}

/// 12. Exact process identities and specular equivalence.
inline GateResult gate_identities(Context &c)
{
    GateResult g{12, "process identities"};
    struct Acc {
        std::uint64_t knot = 0, origin = 0;
        double step = 0.0;
        void merge(const Acc &o)
        {
            knot += o.knot;
            origin += o.origin;
            step = std::max(step, o.step);
        }
    };
    auto law = c.initial_law();
    auto acc = parallel_reduce<Acc>(
        c.prof.identity_trajectories, c.threads,
        [&](Acc &a, std::size_t i) {
            auto t = flight::simulate(c.prof.identity_steps, law, {1.0, 0.0}, ScatterModel::hard_sphere(),
                                      c.cfg.seed, (std::uint64_t(0xc0) << 40) + i);
            for (long j = 0; j <= t.steps(); ++j)
                a.knot += flight::position_at(t, t.tau[j]) != t.q[j];
            for (long j = 1; j <= t.steps(); ++j) {
                // error of |Q_j - Q_{j-1}| relative to the rounding scale of Q_j
                double d = norm(t.q[j] - t.q[j - 1]) - t.xi[j - 1];
                a.step = std::max(a.step, std::abs(d) / (norm(t.q[j]) + t.xi[j - 1]));
            }
            for (long n : {3L, t.steps()}) {
                auto y = flight::interpolated_path(t, n, 0.0);
                a.origin += y[0] != 0.0 || y[1] != 0.0;
            }
        },
        1);
    billiard::BilliardConfig<2> bc;
    auto spec = detail::fill<double>(c.prof.specular_cases, c.threads, [&](std::size_t i) {
        auto rng = c.stream(0xc8, i);
        Vec<2> v = detail::random_direction(rng);
        double w = uniform_open(rng, -1.0, 1.0);
        Vec<2> nhat = w * perp(v) - std::sqrt(1.0 - w * w) * v;
        Vec<2> specular = billiard::scatter(bc, bc.r * nhat, v);
        Vec<2> via_s = column(frame_rotation(v) * scatter_matrix(w), 0);
        return norm(specular - via_s);
    });
    double worst_spec = detail::vmax(spec);
    const double step_tol = 64.0 * std::numeric_limits<double>::epsilon();
    g.metrics["trajectories"] = c.prof.identity_trajectories;
    g.metrics["steps"] = c.prof.identity_steps;
    g.metrics["knot_mismatches"] = acc.knot;
    g.metrics["step_length_max_relative_error"] = acc.step;
    g.metrics["step_length_tolerance"] = step_tol;
    g.metrics["origin_mismatches"] = acc.origin;
    g.metrics["specular_cases"] = c.prof.specular_cases;
    g.metrics["specular_max_difference"] = worst_spec;
    g.pass = acc.knot == 0 && acc.origin == 0 && acc.step <= step_tol && worst_spec <= c.cfg.gates.specular_tol;
    return g;
}

using GateFn = GateResult (*)(Context &);

inline const std::vector<GateFn> &numeric_gates()
{
    static const std::vector<GateFn> gates = {gate_moments,  gate_invariants,     gate_samplers,  gate_xi_tail,
                                              gate_mu_tail,  gate_clt,            gate_growth,    gate_mean_free_path,
                                              gate_histogram, gate_spectral,      gate_mixing,    gate_identities};
    return gates;
}

using Progress = std::function<void(const GateResult &)>;

/// Runs gates 1..12 (or the listed ids) and collects their tables in c.files.
inline std::vector<GateResult> run_numeric_gates(Context &c, const Progress &progress = {},
                                                 std::vector<int> only = {})
{
    std::vector<GateResult> out;
    const auto &gates = numeric_gates();
    for (std::size_t k = 0; k < gates.size(); ++k) {
        int id = int(k) + 1;
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end())
            continue;
        auto t0 = std::chrono::steady_clock::now();
        auto r = gates[k](c);
        if (r.seconds == 0.0)
            r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (progress)
            progress(r);
        out.push_back(std::move(r));
    }
    return out;
}

inline nlohmann::ordered_json gates_json(const std::vector<GateResult> &results)
{
    auto arr = nlohmann::ordered_json::array();
    for (const auto &r : results)
        arr.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"metrics", r.metrics}});
    return arr;
}

/// Writes the tables, gates.json and the manifest with the gate list.
inline void write_outputs(const std::filesystem::path &dir, const Context &c, const std::vector<GateResult> &results)
{
    FileMap files = c.files;
    files["gates.json"] = gates_json(results).dump(2) + "\n";
    nlohmann::ordered_json extra;
    extra["profile"] = c.prof.name;
    auto gl = nlohmann::ordered_json::array();
    for (const auto &r : results)
        gl.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}});
    extra["gates"] = gl;
    write_run(dir, "verify", c.cfg, files, extra);
}

/// Byte comparison of every regular file in two directories.
inline std::vector<std::string> directory_differences(const std::filesystem::path &a, const std::filesystem::path &b)
{
    namespace fs = std::filesystem;
    auto slurp = [](const fs::path &p) {
        std::ifstream f(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(f), {});
    };
    std::vector<std::string> names, diffs;
    for (const auto &dir : {a, b})
        for (const auto &e : fs::directory_iterator(dir))
            if (e.is_regular_file())
                names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    for (const auto &n : names)
        if (!fs::exists(a / n) || !fs::exists(b / n) || slurp(a / n) != slurp(b / n))
            diffs.push_back(n);
    return diffs;
}

/// 13. Two quick-profile verify runs with the same seed and different thread
/// counts must write byte-identical files.
inline GateResult gate_reproducibility(const ExperimentConfig &cfg, const std::filesystem::path &dir)
{
    GateResult g{13, "reproducibility across runs and thread counts"};
    auto t0 = std::chrono::steady_clock::now();
    std::vector<std::string> names;
    for (unsigned threads : {1u, 3u}) {
        Context c(cfg, quick_profile(), threads);
        auto results = run_numeric_gates(c);
        write_outputs(dir / ("threads-" + std::to_string(threads)), c, results);
    }
    auto diffs = directory_differences(dir / "threads-1", dir / "threads-3");
    for (const auto &e : std::filesystem::directory_iterator(dir / "threads-1"))
        names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    g.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    g.metrics["profile"] = "quick";
    g.metrics["threads"] = {1, 3};
    g.metrics["files_compared"] = names;
    g.metrics["differing_files"] = diffs;
    g.pass = diffs.empty() && !names.empty();
    return g;
}

struct VerifyOutcome {
    std::vector<GateResult> results;
    bool all_pass = true;
    int exit_code() const { return all_pass ? 0 : 2; }
};

/// Full verify run: numeric gates at the configured profile, then the
/// reproducibility gate under dir/repro, then gates.json and manifest.json.
inline VerifyOutcome run_verify(const ExperimentConfig &cfg, const std::filesystem::path &dir, unsigned threads,
                                const Progress &progress = {})
{
    cfg.validate();
    Context c(cfg, profile_named(cfg.profile), threads);
    VerifyOutcome out;
    out.results = run_numeric_gates(c, progress);
    auto repro = gate_reproducibility(cfg, dir / "repro");
    if (progress)
        progress(repro);
    out.results.push_back(repro);
    for (const auto &r : out.results)
        out.all_pass = out.all_pass && r.pass;
    write_outputs(dir, c, out.results);
    return out;
}

/// One line per gate: "criterion N: PASS|FAIL name (key metrics, time)".
inline std::string format_line(const GateResult &r)
{
    char head[160];
    std::snprintf(head, sizeof head, "criterion %2d: %s  %s", r.id, r.pass ? "PASS" : "FAIL", r.name.c_str());
    char tail[48];
    std::snprintf(tail, sizeof tail, "  [%.1f s]", r.seconds);
    return std::string(head) + "  " + r.metrics.dump() + tail;
}

} // namespace lorentz::acceptance
