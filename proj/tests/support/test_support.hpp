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

// Helpers shared by the unit tests: slow reference implementations that the
// library versions are checked against.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "lorentz/billiard.hpp"
#include "lorentz/vec.hpp"

namespace testing_support {

using lorentz::operator-;

/// Quadratic-time KS distance: for each sample point, count the points below
/// and at it directly.
inline double ks_reference(const std::vector<double> &sample, const std::function<double(double)> &cdf)
{
    double n = double(sample.size()), d = 0.0;
    for (double x : sample) {
        std::size_t below = 0, at_or_below = 0;
        for (double y : sample) {
            below += y < x;
            at_or_below += y <= x;
        }
        double f = cdf(x);
        d = std::max({d, std::abs(double(at_or_below) / n - f), std::abs(double(below) / n - f)});
    }
    return d;
}

/// First hit of the ray p + t v (t > 0) with any disc of radius r centered at
/// spacing * (i, j), |i|, |j| <= reach, checking every disc.
struct BruteHit {
    std::int64_t i, j;
    double t;
};

inline std::optional<BruteHit> brute_force_hit(lorentz::Vec<2> p, lorentz::Vec<2> v, double r, double spacing,
                                               int reach, std::optional<std::pair<std::int64_t, std::int64_t>> skip)
{
    std::optional<BruteHit> best;
    for (int i = -reach; i <= reach; ++i)
        for (int j = -reach; j <= reach; ++j) {
            if (skip && skip->first == i && skip->second == j)
                continue;
            lorentz::Vec<2> c{spacing * i, spacing * j};
            lorentz::Vec<2> d = p - c;
            double b = lorentz::dot(d, v);
            double disc = b * b - (lorentz::dot(d, d) - r * r);
            if (disc < 0.0)
                continue;
            double t = -b - std::sqrt(disc);
            if (t > 0.0 && (!best || t < best->t))
                best = BruteHit{i, j, t};
        }
    return best;
}

} // namespace testing_support
