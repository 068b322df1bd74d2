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

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "lorentz/errors.hpp"
#include "lorentz/vec.hpp"

namespace lorentz::stats {

/// Neumaier-compensated sum.
class CompensatedSum {
public:
    void add(double x)
    {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }

    void merge(const CompensatedSum &o)
    {
        add(o.sum_);
        add(o.comp_);
    }

    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Count, sums and cross-product sums of D-vectors, with compensation.
template <std::size_t D>
class MomentAccumulator {
public:
    void add(const Vec<D> &x)
    {
        ++n_;
        for (std::size_t i = 0; i < D; ++i) {
            s_[i].add(x[i]);
            for (std::size_t j = i; j < D; ++j)
                ss_[i][j].add(x[i] * x[j]);
        }
    }

    void merge(const MomentAccumulator &o)
    {
        n_ += o.n_;
        for (std::size_t i = 0; i < D; ++i) {
            s_[i].merge(o.s_[i]);
            for (std::size_t j = i; j < D; ++j)
                ss_[i][j].merge(o.ss_[i][j]);
        }
    }

    std::uint64_t count() const { return n_; }

    Vec<D> mean() const
    {
        Vec<D> m{};
        for (std::size_t i = 0; i < D; ++i)
            m[i] = n_ ? s_[i].value() / double(n_) : 0.0;
        return m;
    }

    /// Mean of x_i x_j (uncentered).
    Mat<D> second_moment() const
    {
        Mat<D> m{};
        for (std::size_t i = 0; i < D; ++i)
            for (std::size_t j = i; j < D; ++j)
                m[i][j] = m[j][i] = n_ ? ss_[i][j].value() / double(n_) : 0.0;
        return m;
    }

    /// Population covariance (divisor n).
    Mat<D> covariance() const
    {
        Mat<D> c = second_moment();
        Vec<D> m = mean();
        for (std::size_t i = 0; i < D; ++i)
            for (std::size_t j = 0; j < D; ++j)
                c[i][j] -= m[i] * m[j];
        return c;
    }

private:
    std::uint64_t n_ = 0;
    std::array<CompensatedSum, D> s_{};
    std::array<std::array<CompensatedSum, D>, D> ss_{};
};

/// Merges partial accumulators along a fixed pairwise tree over their
/// positions, so the result depends only on the partition, not on which
/// worker produced which part.
template <class Acc>
Acc reduce_pairwise(std::vector<Acc> parts)
{
    if (parts.empty())
        return Acc{};
    for (std::size_t width = 1; width < parts.size(); width *= 2)
        for (std::size_t i = 0; i + width < parts.size(); i += 2 * width)
            parts[i].merge(parts[i + width]);
    return parts.front();
}

/// Accumulates items [0, n) in fixed blocks of block_size consecutive
/// indices, then merges the blocks pairwise.
template <class Acc, class AddFn>
Acc blocked_reduce(std::size_t n, AddFn &&add_item, std::size_t block_size = 1024)
{
    std::vector<Acc> blocks((n + block_size - 1) / block_size);
    for (std::size_t b = 0; b < blocks.size(); ++b)
        for (std::size_t i = b * block_size; i < std::min(n, (b + 1) * block_size); ++i)
            add_item(blocks[b], i);
    return reduce_pairwise(std::move(blocks));
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// sup_x |F_n(x) - F(x)|, exact over the order statistics.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)> &cdf)
{
    if (sample.empty())
        throw degenerate_error("ks_statistic: empty sample");
    std::sort(sample.begin(), sample.end());
    double n = double(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        double f = cdf(sample[i]);
        d = std::max({d, std::abs(double(i + 1) / n - f), std::abs(double(i) / n - f)});
    }
    return d;
}

/// Two-sample sup |F_a - F_b|; ties are stepped over together.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b)
{
    if (a.empty() || b.empty())
        throw degenerate_error("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double na = double(a.size()), nb = double(b.size()), d = 0.0;
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x)
            ++i;
        while (j < b.size() && b[j] == x)
            ++j;
        d = std::max(d, std::abs(double(i) / na - double(j) / nb));
    }
    return d;
}

/// Pearson statistic over bins cells of equal probability under cdf.
inline double chi_square_equal_mass(std::span<const double> sample, const std::function<double(double)> &cdf,
                                    int bins = 200)
{
    if (sample.empty() || bins < 2)
        throw degenerate_error("chi_square_equal_mass: need data and >= 2 bins");
    std::vector<double> counts(bins, 0.0);
    for (double x : sample) {
        double u = cdf(x);
        int k = std::clamp(static_cast<int>(u * bins), 0, bins - 1);
        counts[k] += 1.0;
    }
    double expect = double(sample.size()) / bins;
    double chi2 = 0.0;
    for (double c : counts)
        chi2 += (c - expect) * (c - expect) / expect;
    return chi2;
}

/// Pearson statistic for cells cut at the given interior edges, each cell
/// assumed to carry probability 1 / (edges.size() + 1).
inline double chi_square_edges(std::span<const double> sample, std::span<const double> edges)
{
    if (sample.empty() || edges.empty())
        throw degenerate_error("chi_square_edges: need data and edges");
    std::vector<double> counts(edges.size() + 1, 0.0);
    for (double x : sample)
        counts[std::upper_bound(edges.begin(), edges.end(), x) - edges.begin()] += 1.0;
    double expect = double(sample.size()) / double(counts.size());
    double chi2 = 0.0;
    for (double c : counts)
        chi2 += (c - expect) * (c - expect) / expect;
    return chi2;
}

inline double chi_square_quantile(double dof, double p)
{
    return boost::math::quantile(boost::math::chi_squared_distribution<double>(dof), p);
}

struct TailRow {
    double u;
    double survival;
    double u2_survival;
    double u2_logu_survival;
};

/// Empirical survival P(X > u) with the compensated columns u^2 P and u^2 log(u) P.
inline std::vector<TailRow> tail_table(std::vector<double> sample, std::span<const double> u_grid)
{
    if (sample.empty() || u_grid.empty())
        throw degenerate_error("tail_table: need samples and a grid");
    std::sort(sample.begin(), sample.end());
    std::vector<TailRow> rows;
    double n = double(sample.size());
    for (double u : u_grid) {
        auto above = sample.end() - std::upper_bound(sample.begin(), sample.end(), u);
        double s = double(above) / n;
        rows.push_back({u, s, u * u * s, u > 0.0 ? u * u * std::log(u) * s : 0.0});
    }
    return rows;
}

/// Survival from a count, for streaming tallies.
inline TailRow tail_row(double u, std::uint64_t above, std::uint64_t total)
{
    double s = double(above) / double(total);
    return {u, s, u * u * s, u * u * std::log(u) * s};
}

struct DecayFit {
    double rate = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
    int points = 0;
};

struct Autocovariance {
    std::vector<double> acov;
    double noise_floor = 0.0;
    DecayFit fit;
};

/// Least squares of log y on lag: y ~ exp(intercept) rate^lag.
inline DecayFit fit_geometric(std::span<const int> lags, std::span<const double> y)
{
    DecayFit f;
    f.points = static_cast<int>(lags.size());
    if (lags.size() < 2)
        return f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, n = double(lags.size());
    for (std::size_t i = 0; i < lags.size(); ++i) {
        double x = lags[i], ly = std::log(y[i]);
        sx += x;
        sy += ly;
        sxx += x * x;
        sxy += x * ly;
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.intercept = (sy - slope * sx) / n;
    f.rate = std::exp(slope);
    double rss = 0.0;
    for (std::size_t i = 0; i < lags.size(); ++i) {
        double e = std::log(y[i]) - (f.intercept + slope * lags[i]);
        rss += e * e;
    }
    f.residual = std::sqrt(rss / n);
    return f;
}

/// Centered autocovariances (divisor N) for lags 0..max_lag, and a geometric
/// fit of |acov| over the leading run of lags >= 1 above the noise floor
/// 3 acov(0) / sqrt(N).
inline Autocovariance autocovariance(std::span<const double> series, int max_lag)
{
    std::size_t n = series.size();
    if (max_lag < 1 || n < 10 * std::size_t(max_lag))
        throw degenerate_error("autocovariance: series must have >= 10 * max_lag points");
    CompensatedSum s;
    for (double x : series)
        s.add(x);
    double mean = s.value() / double(n);
    Autocovariance out;
    for (int k = 0; k <= max_lag; ++k) {
        CompensatedSum c;
        for (std::size_t i = 0; i + k < n; ++i)
            c.add((series[i] - mean) * (series[i + k] - mean));
        out.acov.push_back(c.value() / double(n));
    }
    if (!(out.acov[0] > 0.0))
        throw degenerate_error("autocovariance: zero-variance series");
    out.noise_floor = 3.0 * out.acov[0] / std::sqrt(double(n));
    std::vector<int> lags;
    std::vector<double> y;
    for (int k = 1; k <= max_lag && std::abs(out.acov[k]) > out.noise_floor; ++k) {
        lags.push_back(k);
        y.push_back(std::abs(out.acov[k]));
    }
    out.fit = fit_geometric(lags, y);
    return out;
}

} // namespace lorentz::stats
