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
#include <sstream>
#include <vector>

#include "lorentz/ensemble.hpp"
#include "lorentz/flight.hpp"
#include "lorentz/stats.hpp"

using namespace lorentz;
using namespace lorentz::flight;
using Catch::Approx;

namespace {
const auto hs = ScatterModel::hard_sphere();
const Vec<2> e1{1.0, 0.0};
} // namespace

TEST_CASE("one step moves along the current velocity", "[flight]")
{
    auto rng = rng_stream(40, 0);
    auto s = initial_state(Vec<2>{0.6, 0.8}, 0.3);
    for (int i = 0; i < 10000; ++i) {
        auto before = s;
        s = advance(std::move(s), hs, rng);
        CHECK(s.xi > 0.0);
        CHECK(s.tau - before.tau == Approx(s.xi).margin(4e-16 * s.tau));
        CHECK(norm(s.q - before.q) == Approx(s.xi).margin(1e-15 * (1.0 + norm(before.q))));
        CHECK(norm((s.q - before.q) - s.xi * before.v) <= 1e-12 * (1.0 + norm(before.q)));
        CHECK(s.n == before.n + 1);
    }
}

TEST_CASE("single step from a fixed parameter", "[flight]")
{
    auto t = simulate(1, kernel2d::Custom{0.5}, e1, hs, 41, 0);
    REQUIRE(t.steps() == 1);
    CHECK(t.eta[0] == 0.5);
    CHECK(t.q[1] == Vec<2>{t.xi[0], 0.0});
    CHECK(t.xi[0] > 0.0);
    CHECK(t.xi[0] < kernel2d::support_x0(0.5, t.eta[1]));
}

TEST_CASE("trajectories are deterministic in seed and index", "[flight]")
{
    auto a = simulate(5000, kernel2d::StationaryDiscrete{}, e1, hs, 42, 7);
    auto b = simulate(5000, kernel2d::StationaryDiscrete{}, e1, hs, 42, 7);
    auto c = simulate(5000, kernel2d::StationaryDiscrete{}, e1, hs, 42, 8);
    CHECK(a.xi == b.xi);
    CHECK(a.eta == b.eta);
    CHECK(a.q == b.q);
    CHECK(a.xi != c.xi);
    // streaming follows the same path
    auto s = simulate_streaming(5000, kernel2d::StationaryDiscrete{}, e1, hs, 42, 7, {4000, 10});
    REQUIRE(s.q_at.size() == 2);
    CHECK(s.q_at[0] == a.q[10]);
    CHECK(s.q_at[1] == a.q[4000]);
    CHECK(s.final_state.q == a.q.back());
    CHECK(s.final_state.tau == a.tau.back());
    CHECK_THROWS_AS(simulate(10, kernel2d::StationaryDiscrete{}, e1, hs, 1, 0, 5), resource_error);
    CHECK_THROWS_AS(simulate(0, kernel2d::StationaryDiscrete{}, e1, hs, 1, 0), std::invalid_argument);
}

TEST_CASE("stationary chain has a uniform parameter marginal", "[flight][sampling]")
{
    auto t = simulate(1000000, kernel2d::StationaryDiscrete{}, e1, hs, 43, 0);
    std::vector<double> eta(t.eta.begin() + 1, t.eta.end());
    CHECK(stats::ks_statistic(eta, [](double v) { return 0.5 * (v + 1.0); }) <= 0.002);
}

TEST_CASE("mean flight time per collision", "[flight][sampling]")
{
    const std::size_t n_traj = 2000;
    const long n = 2000;
    auto acc = parallel_reduce<stats::CompensatedSum>(n_traj, 0, [&](stats::CompensatedSum &a, std::size_t i) {
        auto s = simulate_streaming(n, kernel2d::StationaryDiscrete{}, e1, hs, 44, i);
        a.add(s.final_state.tau / double(n));
    });
    CHECK(acc.value() / double(n_traj) == Approx(0.5).epsilon(0.005));
}

TEST_CASE("continuous-time position", "[flight]")
{
    auto t = simulate(200, kernel2d::StationaryContinuous{}, Vec<2>{0.0, 1.0}, hs, 45, 0);
    CHECK(position_at(t, 0.0) == Vec<2>{0.0, 0.0});
    for (std::size_t j = 0; j < t.tau.size(); ++j)
        CHECK(position_at(t, t.tau[j]) == t.q[j]);
    for (std::size_t j = 0; j + 1 < t.tau.size(); ++j) {
        auto mid = position_at(t, 0.5 * (t.tau[j] + t.tau[j + 1]));
        auto expect = 0.5 * (t.q[j] + t.q[j + 1]);
        CHECK(norm(mid - expect) <= 1e-12 * (1.0 + norm(expect)));
    }
    CHECK_THROWS_AS(position_at(t, -1.0), std::out_of_range);
    CHECK_THROWS_AS(position_at(t, t.tau.back() + 1.0), std::out_of_range);
}

TEST_CASE("rescaled interpolated path", "[flight]")
{
    CHECK(std::sqrt(sigma_sq(2)) == Approx(1.0 / (2.0 * pi)).epsilon(1e-15));
    auto t = simulate(1000, kernel2d::StationaryDiscrete{}, e1, hs, 46, 0);
    CHECK(interpolated_path(t, 1000, 0.0) == Vec<2>{0.0, 0.0});
    double scale = std::sqrt(1000.0 * std::log(1000.0)) / (2.0 * pi);
    CHECK(norm(interpolated_path(t, 1000, 1.0) - (1.0 / scale) * t.q[1000]) <= 1e-14 * norm(t.q[1000]));
    auto half = interpolated_path(t, 100, 0.505);
    auto expect = (1.0 / superdiffusive_scale(100)) * (0.5 * (t.q[50] + t.q[51]));
    CHECK(norm(half - expect) <= 1e-12);
    CHECK_THROWS_AS(interpolated_path(t, 2000, 0.5), std::out_of_range);
    CHECK_THROWS_AS(interpolated_path(t, 100, 1.5), std::out_of_range);
}

TEST_CASE("truncated flights", "[flight]")
{
    CHECK(truncation_radius(1, 1.5) == 0.0);
    CHECK(truncation_radius(2, 1.5) == 0.0);
    CHECK(truncation_radius(3, 1.5) == Approx(std::sqrt(3.0 * std::pow(std::log(3.0), 1.5))).epsilon(1e-15));
    auto t = simulate(20000, kernel2d::StationaryDiscrete{}, e1, hs, 47, 0);
    auto d = truncation_diagnostics(t);
    REQUIRE(d.q_prime.size() == t.q.size());
    long truncated = 0;
    for (long j = 1; j <= t.steps(); ++j) {
        double xi = t.xi[j - 1];
        auto mom = kernel2d::moments(t.eta[j - 1], t.eta[j]);
        double mu = mom.k1 / mom.k0;
        CHECK(d.m[j - 1] <= std::min(mu, d.r[j - 1]) * (1.0 + 1e-12));
        CHECK(d.a2[j - 1] >= 0.0);
        if (j >= 3 && xi <= d.r[j - 1])
            CHECK(d.xi_prime[j - 1] == xi);
        truncated += j >= 3 && xi > d.r[j - 1];
        CHECK(d.xi_tilde[j - 1] == d.xi_prime[j - 1] - d.m[j - 1]);
    }
    // with no flight above its threshold from j = 3 on, Q'_n differs from Q_n
    // only by the first two steps, which have r_1 = r_2 = 0
    if (truncated == 0) {
        auto lhs = d.q_prime.back();
        auto rhs = t.q.back() - t.q[2];
        CHECK(norm(lhs - rhs) <= 1e-9 * (1.0 + norm(rhs)));
    }
    CHECK(d.A2.back() > 0.0);
    CHECK_THROWS_AS(truncation_diagnostics(t, 2.0), std::domain_error);

    // the streaming variant reproduces the in-memory diagnostics
    auto s = simulate_truncated_streaming(20000, kernel2d::StationaryDiscrete{}, e1, hs, 47, 0, {100, 20000});
    CHECK(s.q_at[1] == t.q[20000]);
    CHECK(norm(s.q_tilde_at[0] - d.q_tilde[100]) <= 1e-12 * (1.0 + norm(d.q_tilde[100])));
    CHECK(s.A2_at[1] == Approx(d.A2.back()).epsilon(1e-13));
}

TEST_CASE("truncation with all flights short", "[flight]")
{
    // a hand-made trajectory with unit flights: nothing is removed past j = 2
    Trajectory t;
    t.eta = {0.1, -0.2, 0.3, 0.4, -0.5, 0.6};
    t.q.push_back({0.0, 0.0});
    t.tau.push_back(0.0);
    t.v.push_back(e1);
    for (int j = 1; j <= 5; ++j) {
        t.xi.push_back(0.5);
        t.v.push_back(e1);
        t.q.push_back(t.q.back() + 0.5 * e1);
        t.tau.push_back(0.5 * j);
    }
    auto d = truncation_diagnostics(t);
    CHECK(d.q_prime.back() == t.q.back() - t.q[2]);
}

TEST_CASE("trajectory CSV", "[flight]")
{
    auto t = simulate(3, kernel2d::StationaryDiscrete{}, e1, hs, 48, 0);
    std::ostringstream out;
    write_csv(out, t);
    std::istringstream in(out.str());
    std::string line;
    int rows = 0;
    std::getline(in, line);
    CHECK(line == "j,xi,eta,vx,vy,qx,qy,tau");
    while (std::getline(in, line))
        ++rows;
    CHECK(rows == 4);
}
