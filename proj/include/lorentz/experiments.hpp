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

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "lorentz/billiard.hpp"
#include "lorentz/config.hpp"
#include "lorentz/csv.hpp"
#include "lorentz/ensemble.hpp"
#include "lorentz/flight.hpp"
#include "lorentz/kernel2d.hpp"
#include "lorentz/oracle.hpp"
#include "lorentz/output.hpp"
#include "lorentz/report.hpp"
#include "lorentz/scattering.hpp"
#include "lorentz/spectral.hpp"

/// Experiment drivers behind the command-line subcommands. Each returns its
/// tables and manifest extras; nothing is written until the run succeeds.
namespace lorentz::experiments {

struct RunOutput {
    FileMap files;
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();
    /// Human-readable summary for the terminal.
    std::string text;
};

inline ScatterModel model_of(const ExperimentConfig &cfg)
{
    if (cfg.theta == "hard_sphere")
        return ScatterModel::hard_sphere();
    try {
        return ScatterModel::from_csv(cfg.theta);
    } catch (const std::exception &e) {
        // unreadable file, bad rows or an invalid table are all input errors
        throw config_error(std::string("model.theta: ") + e.what());
    }
}

inline kernel2d::InitialLaw law_of(const ExperimentConfig &cfg)
{
    if (cfg.initial == "stationary_discrete")
        return kernel2d::StationaryDiscrete{};
    return kernel2d::StationaryContinuous{};
}

/// Stream index of trajectory i of a subcommand; keeps subcommands apart.
inline std::uint64_t stream_index(std::uint64_t tag, std::uint64_t i) { return (tag << 40) + i; }

/// psi0 on a (w, z, x) grid and the moments on the (w, z) grid. w and z run
/// over cell midpoints of (-1, 1); x over [0, 2].
inline RunOutput kernel_eval(const ExperimentConfig &cfg)
{
    RunOutput out;
    const int n = cfg.grid;
    auto mid = [n](int k) { return -1.0 + (2.0 * k + 1.0) / n; };
    std::ostringstream m, p;
    CsvWriter wm(m), wp(p);
    wm.header({"w", "z", "k0", "k1", "k2", "support_x0"});
    wp.header({"w", "z", "x", "psi0"});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double w = mid(i), z = mid(j);
            auto k = kernel2d::moments(w, z);
            wm.row({w, z, k.k0, k.k1, k.k2, kernel2d::support_x0(w, z)});
            for (int l = 0; l < n; ++l) {
                double x = 2.0 * (l + 1) / n;
                wp.row({w, z, x, kernel2d::psi0(w, x, z)});
            }
        }
    out.files["kernel_moments.csv"] = m.str();
    out.files["kernel_psi0.csv"] = p.str();
    out.text = "tabulated psi0 and moments on a " + std::to_string(n) + "-point grid\n";
    return out;
}

/// Flight-process ensemble: positions at the checkpoints, growth table and a
/// StatsReport of the normalized endpoints and the free-path tail.
inline RunOutput chain(const ExperimentConfig &cfg, unsigned threads)
{
    RunOutput out;
    auto model = model_of(cfg);
    auto law = law_of(cfg);
    const std::size_t m = cfg.trajectories;
    std::vector<long> cps = cfg.checkpoints;
    std::sort(cps.begin(), cps.end());
    if (cps.empty() || cps.back() != cfg.steps)
        cps.push_back(cfg.steps);
    std::vector<flight::TruncatedStream> runs(m);
    parallel_for(m, threads, [&](std::size_t i) {
        runs[i] = flight::simulate_truncated_streaming(cfg.steps, law, {1.0, 0.0}, model, cfg.seed,
                                                       stream_index(1, i), cps, cfg.gamma);
    });
    stats::GrowthAccumulator acc(cps);
    std::ostringstream pos;
    CsvWriter wp(pos);
    wp.header({"index", "n", "qx", "qy", "qx_tilde", "qy_tilde", "A2"});
    std::vector<Vec<2>> ends;
    for (std::size_t i = 0; i < m; ++i) {
        acc.add(runs[i].q_at, runs[i].q_tilde_at);
        for (std::size_t k = 0; k < cps.size(); ++k) {
            wp.cell(i).cell(cps[k]).cell(runs[i].q_at[k][0]).cell(runs[i].q_at[k][1]);
            wp.cell(runs[i].q_tilde_at[k][0]).cell(runs[i].q_tilde_at[k][1]).cell(runs[i].A2_at[k]);
            wp.end_row();
        }
        ends.push_back(runs[i].q_at.back());
    }
    auto rows = acc.rows();
    std::ostringstream g;
    stats::write_csv(g, rows);
    out.files["chain_positions.csv"] = pos.str();
    out.files["growth.csv"] = g.str();

    // free paths from a fixed number of draws, for the tail table
    std::vector<double> xi(std::min<std::size_t>(1000000, m * std::size_t(cfg.steps)));
    for (std::size_t i = 0; i < xi.size(); ++i) {
        auto rng = rng_stream(cfg.seed, stream_index(2, i));
        xi[i] = kernel2d::sample_initial(kernel2d::StationaryDiscrete{}, rng).xi;
    }
    std::vector<double> grid{1.0, 2.0, 5.0, 10.0, 20.0};
    stats::StatsReport rep;
    if (ends.size() >= 100)
        rep = stats::gaussian_summary<2>(ends, flight::superdiffusive_scale(cfg.steps));
    else
        rep.sample_count = ends.size();
    rep.tail_table = stats::tail_table(std::move(xi), grid);
    rep.seed = cfg.seed;
    rep.config_hash = fnv1a_hex(cfg.canonical());
    out.files["chain_report.json"] = rep.to_json().dump(2) + "\n";
    out.files["chain_report.txt"] = rep.to_text();
    if (m > 0 && cfg.steps <= 100000) {
        auto t = flight::simulate(cfg.steps, law, {1.0, 0.0}, model, cfg.seed, stream_index(1, 0));
        std::ostringstream tr;
        flight::write_csv(tr, t);
        out.files["trajectory_0.csv"] = tr.str();
    }
    out.text = rep.to_text();
    for (const auto &r : rows)
        out.text += "n = " + std::to_string(r.n) + "  E|Q|^2/(n ln n) = " + format_double(r.raw) +
                    "  E|Q~|^2/(n ln n) = " + format_double(r.truncated) + "\n";
    return out;
}

namespace detail {

template <std::size_t D>
RunOutput billiard_run(const ExperimentConfig &cfg, unsigned threads)
{
    RunOutput out;
    billiard::BilliardConfig<D> bc;
    bc.r = cfg.r;
    bc.model = model_of(cfg);
    bc.validate();
    const std::size_t m = cfg.trajectories;
    std::vector<billiard::BilliardTrajectory<D>> trajs(m);
    parallel_for(m, threads, [&](std::size_t i) {
        auto rng = rng_stream(cfg.seed, stream_index(3, i));
        Vec<D> v0{};
        if constexpr (D == 2) {
            double phi = uniform_open(rng, -pi, pi);
            v0 = {std::cos(phi), std::sin(phi)};
        } else {
            double c = uniform_open(rng, -1.0, 1.0), phi = uniform_open(rng, -pi, pi), s = std::sqrt(1.0 - c * c);
            v0 = {s * std::cos(phi), s * std::sin(phi), c};
        }
        trajs[i] = billiard::simulate_billiard(bc, cfg.collisions, v0, cfg.seed, stream_index(4, i));
    });
    stats::CompensatedSum sum;
    std::uint64_t count = 0, escapes = 0;
    std::ostringstream per;
    CsvWriter wp(per);
    wp.header({"index", "collisions", "mean_path", "escaped"});
    for (std::size_t i = 0; i < m; ++i) {
        stats::CompensatedSum s;
        for (double l : trajs[i].path_len) {
            s.add(l);
            sum.add(l);
        }
        count += trajs[i].path_len.size();
        escapes += trajs[i].escaped;
        wp.cell(i).cell(trajs[i].collisions()).cell(s.value() / double(std::max<long>(1, trajs[i].collisions())));
        wp.cell(int(trajs[i].escaped));
        wp.end_row();
    }
    double mean = sum.value() / double(std::max<std::uint64_t>(count, 1));
    nlohmann::ordered_json summary;
    summary["dimension"] = D;
    summary["r"] = cfg.r;
    summary["collisions"] = count;
    summary["escapes"] = escapes;
    summary["mean_path"] = mean;
    summary["santalo"] = billiard::santalo_mean_free_path(int(D), cfg.r);
    summary["limit"] = mean_free_path(int(D));
    if constexpr (D == 2) {
        // free-path marginal against the limit law, on the x-bins of the kernel check
        std::vector<double> xe{0.0, 0.125, 0.25, 0.375, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, INFINITY};
        auto masses = oracle::histogram_masses({-1.0, 1.0}, xe, {-1.0, 1.0}, 64);
        std::vector<std::uint64_t> counts(masses.size(), 0);
        for (const auto &t : trajs)
            for (double l : t.path_len)
                ++counts[std::upper_bound(xe.begin(), xe.end(), l) - xe.begin() - 1];
        std::ostringstream cmp;
        CsvWriter wc(cmp);
        wc.header({"x_lo", "x_hi", "empirical", "limit"});
        double tv = 0.0;
        for (std::size_t k = 0; k < masses.size(); ++k) {
            double e = double(counts[k]) / double(std::max<std::uint64_t>(count, 1));
            tv += std::abs(e - masses[k]);
            wc.row({xe[k], xe[k + 1], e, masses[k]});
        }
        summary["free_path_tv"] = 0.5 * tv;
        out.files["free_path_compare.csv"] = cmp.str();
        if (m > 0 && cfg.collisions <= 100000) {
            std::ostringstream tr;
            billiard::write_csv(tr, bc, trajs[0]);
            out.files["billiard_0.csv"] = tr.str();
        }
    }
    out.files["billiard_trajectories.csv"] = per.str();
    out.files["billiard_summary.json"] = summary.dump(2) + "\n";
    out.text = summary.dump(2) + "\n";
    return out;
}

} // namespace detail

inline RunOutput billiard_run(const ExperimentConfig &cfg, unsigned threads)
{
    if (cfg.dimension == 3)
        return detail::billiard_run<3>(cfg, threads);
    return detail::billiard_run<2>(cfg, threads);
}

/// Normalized endpoints Q_n / (sigma_2 sqrt(n ln n)) and their Gaussian summary.
inline RunOutput clt(const ExperimentConfig &cfg, unsigned threads)
{
    if (cfg.trajectories < 100)
        throw config_error("clt: ensemble.trajectories must be >= 100");
    RunOutput out;
    auto model = model_of(cfg);
    auto law = law_of(cfg);
    const std::size_t m = cfg.trajectories;
    std::vector<Vec<2>> ends(m);
    parallel_for(m, threads, [&](std::size_t i) {
        ends[i] = flight::simulate_streaming(cfg.steps, law, {1.0, 0.0}, model, cfg.seed, stream_index(5, i),
                                             {cfg.steps})
                      .q_at[0];
    });
    double scale = flight::superdiffusive_scale(cfg.steps);
    auto rep = stats::gaussian_summary<2>(ends, scale);
    rep.seed = cfg.seed;
    rep.config_hash = fnv1a_hex(cfg.canonical());
    std::vector<double> angles(m);
    std::ostringstream e;
    CsvWriter we(e);
    we.header({"index", "y1", "y2", "angle"});
    for (std::size_t i = 0; i < m; ++i) {
        angles[i] = std::atan2(ends[i][1], ends[i][0]);
        we.cell(i).cell(ends[i][0] / scale).cell(ends[i][1] / scale).cell(angles[i]);
        we.end_row();
    }
    double ks_angle = stats::ks_statistic(angles, [](double a) { return (a + pi) / (2.0 * pi); });
    out.files["clt_endpoints.csv"] = e.str();
    auto j = rep.to_json();
    j["angle_ks"] = ks_angle;
    j["scale"] = scale;
    out.files["clt_report.json"] = j.dump(2) + "\n";
    out.files["clt_report.txt"] = rep.to_text();
    out.text = rep.to_text() + "angle ks          " + format_double(ks_angle) + "\n";
    return out;
}

inline RunOutput spectral(const ExperimentConfig &cfg)
{
    RunOutput out;
    auto est = stats::spectral_gap(cfg.spectral_m);
    nlohmann::ordered_json j;
    j["m"] = cfg.spectral_m;
    j["omega0"] = est.omega;
    j["iterations"] = est.iterations;
    j["row_drift"] = est.row_drift;
    j["doeblin_bound"] = doeblin_bound(2);
    out.files["spectral.json"] = j.dump(2) + "\n";
    out.text = j.dump(2) + "\n";
    return out;
}

} // namespace lorentz::experiments
