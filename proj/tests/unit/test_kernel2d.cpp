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
#include <vector>

#include "lorentz/kernel2d.hpp"
#include "lorentz/oracle.hpp"
#include "lorentz/rng.hpp"
#include "lorentz/special.hpp"
#include "lorentz/stats.hpp"

using namespace lorentz;
using namespace lorentz::kernel2d;
using Catch::Approx;

namespace {
constexpr double c6 = 6.0 / (pi * pi);
}

TEST_CASE("dilogarithm matches reference values", "[special]")
{
    // 20-digit references from an arbitrary-precision polylog
    const std::pair<double, double> ref[] = {
        {-50.0, -9.2769951853326218401}, {-5.0, -2.74927912606080829},   {-1.0, -0.82246703342411321824},
        {-0.3, -0.28007433375958289452}, {1e-8, 1.000000002500000032e-8}, {0.25, 0.26765263908273260692},
        {0.5, 0.5822405264650125059},    {0.7, 0.88937762428603866222},   {0.99, 1.5886254480763752857},
    };
    for (auto [x, v] : ref)
        CHECK(dilog(x) == Approx(v).epsilon(4e-16).margin(1e-300));
    CHECK(dilog(0.0) == 0.0);
    CHECK(dilog(1.0) == Approx(zeta2).epsilon(1e-16));
    CHECK_THROWS_AS(dilog(1.5), std::domain_error);
}

TEST_CASE("Gauss-Legendre integrates polynomials exactly", "[special]")
{
    auto gl = gauss_legendre(12);
    double s0 = 0, s22 = 0, s23 = 0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        s0 += gl.weights[i];
        s22 += gl.weights[i] * std::pow(gl.nodes[i], 22);
        s23 += gl.weights[i] * std::pow(gl.nodes[i], 23);
    }
    CHECK(s0 == Approx(2.0).epsilon(1e-15));
    CHECK(s22 == Approx(2.0 / 23.0).epsilon(1e-13));
    CHECK(std::abs(s23) < 1e-15);
}

TEST_CASE("psi0 worked examples", "[kernel2d]")
{
    CHECK(psi0(0.5, 0.5, 0.0) == Approx(c6).epsilon(1e-15));
    CHECK(psi0(0.5, 0.8, 0.0) == Approx(3.0 / (pi * pi)).epsilon(1e-14));
    // frozen from the closed form; the decimal above is the same number
    CHECK(psi0(0.5, 0.8, 0.0) == Approx(0.30396355092701327).epsilon(1e-15));
    CHECK(psi0(0.5, 2.0, 0.0) == 0.0);
    CHECK(psi0(0.3, 0.5, 0.7) == psi0(0.7, 0.5, 0.3));
}

TEST_CASE("psi0 rejects invalid arguments", "[kernel2d]")
{
    CHECK_THROWS_AS(psi0(1.0, 0.5, 0.0), std::domain_error);
    CHECK_THROWS_AS(psi0(0.0, 0.5, -1.0), std::domain_error);
    CHECK_THROWS_AS(psi0(0.0, 0.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(psi0(0.0, -1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(psi0(std::nan(""), 0.5, 0.0), std::domain_error);
}

TEST_CASE("support endpoint", "[kernel2d]")
{
    CHECK(support_x0(0.5, 0.0) == Approx(1.0).epsilon(1e-15));
    CHECK(support_x0(-0.3, -0.2) == Approx(1.0 / 1.2).epsilon(1e-15));
    CHECK(support_x0(0.0, 0.0) == 1.0);
    // positivity changes exactly at x0 on a dense grid
    auto rng = rng_stream(11, 0);
    for (int i = 0; i < 2000; ++i) {
        double w = uniform_open(rng, -1.0, 1.0), z = uniform_open(rng, -1.0, 1.0);
        double x0 = support_x0(w, z);
        CHECK(psi0(w, x0 * (1.0 - 1e-9), z) > 0.0);
        CHECK(psi0(w, x0, z) == 0.0);
        CHECK(psi0(w, x0 * (1.0 + 1e-9), z) == 0.0);
    }
}

TEST_CASE("moments closed forms", "[kernel2d]")
{
    auto m = moments(0.5, 0.0);
    // K0 = (6/pi^2) 2 ln 1.5; frozen from the formula
    CHECK(m.k0 == Approx(c6 * 2.0 * std::log(1.5)).epsilon(1e-15));
    CHECK(m.k0 == Approx(0.49298645615025194).epsilon(1e-15));
    CHECK(m.k1 == Approx(3.0 / (pi * pi) / 1.5).epsilon(1e-15));
    CHECK(m.k2 == Approx(2.5 / 2.25 / (pi * pi)).epsilon(1e-15));
    auto r = moments(-0.5, 0.0);
    CHECK(r.k0 == Approx(m.k0).epsilon(1e-15));
    CHECK(r.k1 == Approx(m.k1).epsilon(1e-15));
    CHECK(r.k2 == Approx(m.k2).epsilon(1e-15));
}

TEST_CASE("moments agree with quadrature and satisfy Cauchy-Schwarz", "[kernel2d]")
{
    auto rng = rng_stream(12, 0);
    for (int i = 0; i < 200; ++i) {
        double w = uniform_open(rng, -1.0, 1.0), z = uniform_open(rng, -1.0, 1.0);
        auto m = moments(w, z);
        CHECK(std::abs(m.k0 - oracle::moment(w, z, 0)) <= 1e-9);
        CHECK(std::abs(m.k1 - oracle::moment(w, z, 1)) <= 1e-9);
        CHECK(std::abs(m.k2 - oracle::moment(w, z, 2)) <= 1e-9);
        CHECK(m.k2 * m.k0 >= m.k1 * m.k1 * (1.0 - 1e-14));
    }
}

TEST_CASE("degenerate and boundary cases of the moments", "[kernel2d]")
{
    // w = z: K0 -> c / (1 + w)
    for (double w : {-0.7, 0.0, 0.4}) {
        double z = std::abs(w);
        CHECK(moments(z, z).k0 == Approx(c6 / (1.0 + z)).epsilon(1e-14));
        auto near = moments(z, z + 3e-8);
        CHECK(near.k0 == Approx(oracle::moment(z, z + 3e-8, 0)).epsilon(1e-9));
        auto far = moments(z, z + 3e-7);
        CHECK(near.k0 == Approx(far.k0).epsilon(1e-6));
    }
    // both branch formulas agree across w + z = 0
    for (double w : {-0.6, 0.1, 0.8}) {
        auto a = moments(w, -w + 1e-13), b = moments(w, -w - 1e-13);
        CHECK(a.k0 == Approx(b.k0).epsilon(1e-10));
        CHECK(a.k1 == Approx(b.k1).epsilon(1e-10));
        CHECK(a.k2 == Approx(b.k2).epsilon(1e-10));
    }
}

TEST_CASE("truncated moments", "[kernel2d]")
{
    auto t0 = moments_truncated(0.5, 0.0, 0.0);
    CHECK(t0.k1r == 0.0);
    CHECK(t0.k2r == 0.0);
    auto full = moments(0.5, 0.0);
    auto t10 = moments_truncated(0.5, 0.0, 10.0);
    CHECK(t10.k1r == full.k1);
    CHECK(t10.k2r == full.k2);
    auto t23 = moments_truncated(0.5, 0.0, 2.0 / 3.0);
    CHECK(t23.k1r == Approx(4.0 / 3.0 / (pi * pi)).epsilon(1e-14));
    CHECK(t23.k1r == Approx(0.13509491152311703).epsilon(1e-15));
    CHECK_THROWS_AS(moments_truncated(0.5, 0.0, -1.0), std::domain_error);

    auto rng = rng_stream(13, 0);
    for (int i = 0; i < 200; ++i) {
        double w = uniform_open(rng, -1.0, 1.0), z = uniform_open(rng, -1.0, 1.0);
        double x0 = support_x0(w, z);
        double prev1 = 0.0, prev2 = 0.0;
        for (int k = 1; k <= 12; ++k) {
            double r = x0 * k / 10.0;
            auto t = moments_truncated(w, z, r);
            CHECK(t.k1r >= prev1);
            CHECK(t.k2r >= prev2);
            prev1 = t.k1r;
            prev2 = t.k2r;
            if (k % 4 == 1) {
                CHECK(std::abs(t.k1r - oracle::moment(w, z, 1, r)) <= 1e-9);
                CHECK(std::abs(t.k2r - oracle::moment(w, z, 2, r)) <= 1e-9);
            }
        }
    }
}

TEST_CASE("conditional free-path CDF", "[kernel2d]")
{
    CHECK(xi_cdf(0.5, 0.0, 0.0) == 0.0);
    CHECK(xi_cdf(0.5, 0.0, 1.0) == Approx(1.0).epsilon(1e-15));
    double expect = c6 * (2.0 / 3.0) / moments(0.5, 0.0).k0;
    CHECK(xi_cdf(0.5, 0.0, 2.0 / 3.0) == Approx(expect).epsilon(1e-15));
    CHECK(xi_cdf(0.5, 0.0, 2.0 / 3.0) == Approx(0.82210115412547724).epsilon(1e-15));
    auto rng = rng_stream(14, 0);
    for (int i = 0; i < 2000; ++i) {
        double w = uniform_open(rng, -1.0, 1.0), z = uniform_open(rng, -1.0, 1.0), q = uniform_open(rng);
        double x = xi_quantile(w, z, q);
        CHECK(x > 0.0);
        CHECK(x <= support_x0(w, z));
        CHECK(std::abs(xi_cdf(w, z, x) - q) <= 1e-10);
    }
}

TEST_CASE("conditional CDF of the next parameter", "[kernel2d]")
{
    for (double w : {-0.999, -0.5, 0.0, 0.3, 0.95}) {
        EtaCdf g(w);
        CHECK(g(-1.0) == 0.0);
        CHECK(g(1.0) == 1.0);
        // against direct integration of K0
        for (double z : {-0.9, -0.2, 0.0, 0.4, 0.99})
            CHECK(std::abs(g(z) - oracle::eta_mass(w, -1.0, z)) <= 1e-10);
        for (double q : {1e-9, 0.01, 0.3, 0.5, 0.77, 0.999999}) {
            double z = g.quantile(q);
            CHECK(std::abs(g(z) - q) <= 1e-12);
        }
    }
}

TEST_CASE("samplers of the conditional laws", "[kernel2d][sampling]")
{
    const int n = 1000000;
    std::vector<double> z(n), zneg(n), x(n);
    stats::CompensatedSum zs, xs;
    for (int i = 0; i < n; ++i) {
        auto a = rng_stream(15, i), b = rng_stream(16, i), c = rng_stream(17, i);
        z[i] = sample_eta_given(0.5, a);
        zneg[i] = -sample_eta_given(-0.5, b);
        x[i] = sample_xi_given(0.5, 0.0, c);
        zs.add(z[i]);
        xs.add(x[i]);
        REQUIRE(x[i] > 0.0);
        REQUIRE(x[i] < support_x0(0.5, 0.0));
    }
    // quadrature mean of z under K0(0.5, .), from an independent high-precision evaluation
    CHECK(std::abs(zs.value() / n - (-0.10792710185402662866)) <= 0.005);
    auto m = moments(0.5, 0.0);
    CHECK(xs.value() / n == Approx(m.k1 / m.k0).epsilon(0.01));
    CHECK(stats::ks_two_sample(z, zneg) <= 0.003);
    CHECK(stats::ks_statistic(x, [](double v) { return xi_cdf(0.5, 0.0, std::max(v, 0.0)); }) <= 0.002);
    auto edges = oracle::eta_equal_mass_edges(0.5, 200);
    CHECK(stats::chi_square_edges(z, edges) <= stats::chi_square_quantile(199, 0.999));
}

TEST_CASE("initial laws", "[kernel2d][sampling]")
{
    const int n = 1000000;
    std::vector<double> eta(n);
    stats::CompensatedSum xs;
    std::size_t above_one = 0;
    for (int i = 0; i < n; ++i) {
        auto rng = rng_stream(18, i);
        auto d = sample_initial(StationaryDiscrete{}, rng);
        eta[i] = d.eta1;
        xs.add(d.xi);
        auto rc = rng_stream(19, i);
        above_one += sample_initial(StationaryContinuous{}, rc).xi > 1.0;
    }
    CHECK(xs.value() / n == Approx(0.5).epsilon(0.01));
    CHECK(stats::ks_statistic(eta, [](double v) { return 0.5 * (v + 1.0); }) <= 0.002);
    // P(x > 1) under Psi: (1/xbar) int_1^inf P0(xi > s) ds, from quadrature of Psi0 tails
    auto gl = gauss_legendre(64);
    double p = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i)
        for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
            double w = gl.nodes[i], z = gl.nodes[j];
            auto full = moments(w, z);
            auto tr = moments_truncated(w, z, 1.0);
            // int_1^inf (x - 1) Psi0 dx = (K1 - K1r) - (K0 - K0r)
            double tail = (full.k1 - tr.k1r) - (full.k0 - tr.k0r);
            p += gl.weights[i] * gl.weights[j] * 0.5 * tail;
        }
    p /= 0.5;
    CHECK(double(above_one) / n == Approx(p).epsilon(0.02));
}

TEST_CASE("Custom initial law conditions on eta0", "[kernel2d]")
{
    auto rng = rng_stream(20, 0);
    for (int i = 0; i < 100; ++i) {
        auto d = sample_initial(Custom{0.5}, rng);
        CHECK(d.eta0 == 0.5);
        CHECK(d.xi < support_x0(0.5, d.eta1));
    }
    CHECK_THROWS_AS(sample_initial(Custom{1.5}, rng), std::domain_error);
}
