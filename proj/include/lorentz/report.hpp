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
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lorentz/constants.hpp"
#include "lorentz/csv.hpp"
#include "lorentz/errors.hpp"
#include "lorentz/flight.hpp"
#include "lorentz/stats.hpp"

namespace lorentz::stats {

/// Summary of one estimator run. Emitted as JSON for machines and as
/// aligned columns for people.
struct StatsReport {
    std::uint64_t sample_count = 0;
    std::vector<double> mean;
    std::vector<std::vector<double>> covariance;
    std::vector<double> ks_per_component;
    std::vector<TailRow> tail_table;
    std::optional<DecayFit> decay_fit;
    std::uint64_t seed = 0;
    std::string config_hash;

    nlohmann::ordered_json to_json() const
    {
        nlohmann::ordered_json j;
        j["sample_count"] = sample_count;
        j["mean"] = mean;
        j["covariance"] = covariance;
        j["ks_per_component"] = ks_per_component;
        auto rows = nlohmann::ordered_json::array();
        for (const auto &r : tail_table)
            rows.push_back({{"u", r.u},
                            {"survival", r.survival},
                            {"u2_survival", r.u2_survival},
                            {"u2_logu_survival", r.u2_logu_survival}});
        j["tail_table"] = rows;
        if (decay_fit)
            j["decay_fit"] = {{"rate", decay_fit->rate},
                              {"intercept", decay_fit->intercept},
                              {"residual", decay_fit->residual},
                              {"points", decay_fit->points}};
        else
            j["decay_fit"] = nullptr;
        j["metadata"] = {{"seed", seed}, {"config_hash", config_hash}};
        return j;
    }

    std::string to_text() const
    {
        std::string out;
        auto line = [&out](const std::string &label, const std::string &value) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%-18s", label.c_str());
            out += buf;
            out += value;
            out += '\n';
        };
        auto num = [](double v) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%14.6e", v);
            return std::string(buf);
        };
        line("samples", std::to_string(sample_count));
        std::string m;
        for (double v : mean)
            m += num(v);
        line("mean", m);
        for (std::size_t i = 0; i < covariance.size(); ++i) {
            std::string row;
            for (double v : covariance[i])
                row += num(v);
            line(i == 0 ? "covariance" : "", row);
        }
        std::string ks;
        for (double v : ks_per_component)
            ks += num(v);
        line("ks", ks);
        if (!tail_table.empty()) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "%14s%14s%14s%14s\n", "u", "survival", "u2*S", "u2*ln(u)*S");
            out += buf;
            for (const auto &r : tail_table)
                out += num(r.u) + num(r.survival) + num(r.u2_survival) + num(r.u2_logu_survival) + "\n";
        }
        if (decay_fit)
            line("decay rate", num(decay_fit->rate) + num(decay_fit->intercept) + num(decay_fit->residual));
        line("seed", std::to_string(seed));
        line("config hash", config_hash);
        return out;
    }
};

/// Mean, covariance and per-component KS distance to N(0, 1) of samples / scale.
template <std::size_t D>
StatsReport gaussian_summary(std::span<const Vec<D>> samples, double scale)
{
    if (samples.size() < 100)
        throw degenerate_error("gaussian_summary: need at least 100 samples");
    if (!(scale > 0.0))
        throw std::invalid_argument("gaussian_summary: scale must be positive");
    auto acc = blocked_reduce<MomentAccumulator<D>>(
        samples.size(), [&](MomentAccumulator<D> &a, std::size_t i) { a.add((1.0 / scale) * samples[i]); });
    StatsReport r;
    r.sample_count = samples.size();
    auto m = acc.mean();
    auto c = acc.covariance();
    r.mean.assign(m.begin(), m.end());
    for (std::size_t i = 0; i < D; ++i) {
        r.covariance.emplace_back(c[i].begin(), c[i].end());
        std::vector<double> comp(samples.size());
        for (std::size_t k = 0; k < samples.size(); ++k)
            comp[k] = samples[k][i] / scale;
        r.ks_per_component.push_back(ks_statistic(std::move(comp), normal_cdf));
    }
    return r;
}

/// Ensemble second moments at one checkpoint n, divided by n ln n.
struct GrowthRow {
    long n;
    double raw;
    double truncated;
};

inline void write_csv(std::ostream &out, std::span<const GrowthRow> rows)
{
    CsvWriter w(out);
    w.header({"n", "raw", "truncated"});
    for (const auto &r : rows) {
        w.cell(r.n).cell(r.raw).cell(r.truncated);
        w.end_row();
    }
}

/// Per-checkpoint sums of |Q_n|^2 and |Q~_n|^2; mergeable so ensembles can be
/// reduced deterministically.
class GrowthAccumulator {
public:
    GrowthAccumulator() = default;
    explicit GrowthAccumulator(std::vector<long> checkpoints)
        : checkpoints_(std::move(checkpoints)), raw_(checkpoints_.size()), trunc_(checkpoints_.size())
    {
    }

    void add(std::span<const Vec<2>> q_at, std::span<const Vec<2>> q_tilde_at)
    {
        for (std::size_t k = 0; k < checkpoints_.size(); ++k) {
            raw_[k].add(dot(q_at[k], q_at[k]));
            trunc_[k].add(dot(q_tilde_at[k], q_tilde_at[k]));
        }
        ++count_;
    }

    void merge(const GrowthAccumulator &o)
    {
        if (checkpoints_.empty()) {
            *this = o;
            return;
        }
        for (std::size_t k = 0; k < checkpoints_.size() && k < o.raw_.size(); ++k) {
            raw_[k].merge(o.raw_[k]);
            trunc_[k].merge(o.trunc_[k]);
        }
        count_ += o.count_;
    }

    std::uint64_t count() const { return count_; }

    std::vector<GrowthRow> rows() const
    {
        std::vector<GrowthRow> out;
        for (std::size_t k = 0; k < checkpoints_.size(); ++k) {
            double n = double(checkpoints_[k]);
            double norm = double(count_) * n * std::log(n);
            out.push_back({checkpoints_[k], raw_[k].value() / norm, trunc_[k].value() / norm});
        }
        return out;
    }

private:
    std::vector<long> checkpoints_;
    std::vector<CompensatedSum> raw_, trunc_;
    std::uint64_t count_ = 0;
};

inline void check_checkpoints(std::span<const long> checkpoints, long steps)
{
    for (long n : checkpoints)
        if (n < 3 || n > steps)
            throw std::out_of_range("growth_table: checkpoints must lie in [3, trajectory length]");
}

/// Rows (n, E|Q_n|^2 / (n ln n), E|Q~_n|^2 / (n ln n)) over an in-memory ensemble.
inline std::vector<GrowthRow> growth_table(std::span<const flight::Trajectory> ensemble,
                                           std::vector<long> checkpoints, double gamma = flight::default_gamma)
{
    std::sort(checkpoints.begin(), checkpoints.end());
    if (ensemble.empty())
        return {};
    GrowthAccumulator acc(checkpoints);
    for (const auto &traj : ensemble) {
        check_checkpoints(checkpoints, traj.steps());
        auto d = flight::truncation_diagnostics(traj, gamma);
        std::vector<Vec<2>> q, qt;
        for (long n : checkpoints) {
            q.push_back(traj.q[n]);
            qt.push_back(d.q_tilde[n]);
        }
        acc.add(q, qt);
    }
    return acc.rows();
}

} // namespace lorentz::stats
