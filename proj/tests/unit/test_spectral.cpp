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

#include <catch_amalgamated.hpp>

#include <cmath>

#include "lorentz/constants.hpp"
#include "lorentz/spectral.hpp"

using namespace lorentz;
using Catch::Approx;

TEST_CASE("rank-one kernel has no gap norm", "[spectral]")
{
    auto g = stats::build_operator_grid(100, [](double, double z) { return std::clamp(0.5 * (z + 1.0), 0.0, 1.0); });
    CHECK(g.row_drift < 1e-14);
    CHECK(stats::operator_gap_norm(g).omega <= 1e-12);
}

TEST_CASE("identity-like kernel has norm one", "[spectral]")
{
    // P concentrated near the diagonal: a step CDF at z = w
    auto g = stats::build_operator_grid(60, [](double w, double z) { return z >= w ? 1.0 : 0.0; });
    CHECK(stats::operator_gap_norm(g).omega == Approx(1.0).epsilon(1e-6));
}

TEST_CASE("gap norm of the two-dimensional kernel", "[spectral]")
{
    auto lo = stats::spectral_gap(200);
    auto hi = stats::spectral_gap(400);
    CHECK(std::abs(lo.omega - hi.omega) <= 1e-3);
    CHECK(hi.omega > 0.0);
    CHECK(hi.omega < doeblin_bound(2) + 1e-3);
    CHECK(doeblin_bound(2) == Approx(0.8480182).epsilon(1e-7));
    CHECK(hi.row_drift < 1e-12);
    CHECK_THROWS_AS(stats::spectral_gap(10), std::invalid_argument);
}
