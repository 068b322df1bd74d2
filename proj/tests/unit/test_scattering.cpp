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
#include <filesystem>
#include <fstream>
#include <vector>

#include "lorentz/rng.hpp"
#include "lorentz/scattering.hpp"

using namespace lorentz;
using Catch::Approx;

namespace {

template <std::size_t D>
double max_abs_diff(const Mat<D> &a, const Mat<D> &b)
{
    double d = 0.0;
    for (std::size_t i = 0; i < D; ++i)
        for (std::size_t j = 0; j < D; ++j)
            d = std::max(d, std::abs(a[i][j] - b[i][j]));
    return d;
}

template <std::size_t D>
double orth_error(const Mat<D> &a)
{
    return max_abs_diff<D>(transpose(a) * a, identity<D>());
}

} // namespace

TEST_CASE("hard-sphere scattering angle", "[scattering]")
{
    CHECK(theta_hard_sphere(0.0) == pi);
    CHECK(theta_hard_sphere(1.0 / std::sqrt(2.0)) == Approx(pi / 2).epsilon(1e-15));
    double prev = pi;
    for (double w = 0.9; w < 1.0; w = 0.5 * (w + 1.0)) {
        double t = theta_hard_sphere(w);
        CHECK(t < prev);
        CHECK(t > 0.0);
        prev = t;
        if (1.0 - w < 1e-12)
            break;
    }
    CHECK(theta_hard_sphere(std::nextafter(1.0, 0.0)) < 1e-7);
    CHECK_THROWS_AS(theta_hard_sphere(1.0), std::domain_error);
    CHECK_THROWS_AS(theta_hard_sphere(-0.1), std::domain_error);
}

TEST_CASE("scattering matrix in two dimensions", "[scattering]")
{
    Mat<2> quarter{{{0.0, -1.0}, {1.0, 0.0}}};
    CHECK(max_abs_diff<2>(scatter_matrix(1.0 / std::sqrt(2.0)), quarter) < 1e-15);
    Mat<2> minus{{{-1.0, 0.0}, {0.0, -1.0}}};
    CHECK(scatter_matrix(0.0) == minus);
    // negative w rotates the other way
    CHECK(max_abs_diff<2>(scatter_matrix(-1.0 / std::sqrt(2.0)), transpose(quarter)) < 1e-15);
    auto rng = rng_stream(30, 0);
    for (int i = 0; i < 10000; ++i) {
        auto s = scatter_matrix(uniform_open(rng, -1.0, 1.0));
        CHECK(orth_error<2>(s) <= 1e-12);
        CHECK(std::abs(determinant<2>(s) - 1.0) <= 1e-12);
    }
    CHECK_THROWS_AS(scatter_matrix(1.0), std::domain_error);
}

TEST_CASE("scattering matrix in three dimensions", "[scattering]")
{
    Mat<3> s0{{{-1.0, 0.0, 0.0}, {0.0, -1.0, 0.0}, {0.0, 0.0, 1.0}}};
    CHECK(scatter_matrix(Vec<2>{0.0, 0.0}) == s0);
    auto rng = rng_stream(31, 0);
    for (int i = 0; i < 10000; ++i) {
        Vec<2> w{uniform_open(rng, -0.7, 0.7), uniform_open(rng, -0.7, 0.7)};
        auto s = scatter_matrix(w);
        CHECK(orth_error<3>(s) <= 1e-12);
        CHECK(std::abs(determinant<3>(s) - 1.0) <= 1e-12);
        // e1 is turned by theta(|w|) toward w
        double len = std::hypot(w[0], w[1]);
        auto out = column(s, 0);
        CHECK(out[0] == Approx(std::cos(theta_hard_sphere(len))).margin(1e-12));
        CHECK(out[1] * w[1] - out[2] * w[0] == Approx(0.0).margin(1e-12));
    }
}

TEST_CASE("frame rotation maps e1 to v", "[scattering]")
{
    CHECK(frame_rotation(Vec<2>{1.0, 0.0}) == identity<2>());
    Mat<2> quarter{{{0.0, -1.0}, {1.0, 0.0}}};
    CHECK(max_abs_diff<2>(frame_rotation(Vec<2>{0.0, 1.0}), quarter) < 1e-15);
    Mat<2> minus{{{-1.0, 0.0}, {0.0, -1.0}}};
    CHECK(frame_rotation(Vec<2>{-1.0, 0.0}) == minus);

    CHECK(frame_rotation(Vec<3>{1.0, 0.0, 0.0}) == identity<3>());
    auto back = frame_rotation(Vec<3>{-1.0, 0.0, 0.0});
    CHECK(std::abs(determinant<3>(back) - 1.0) < 1e-15);
    CHECK(column(back, 0) == Vec<3>{-1.0, 0.0, 0.0});

    auto rng = rng_stream(32, 0);
    for (int i = 0; i < 10000; ++i) {
        double a = uniform_open(rng, -pi, pi);
        Vec<2> v{std::cos(a), std::sin(a)};
        auto r2 = frame_rotation(v);
        CHECK(norm(column(r2, 0) - v) <= 1e-10);
        CHECK(orth_error<2>(r2) <= 1e-12);
        Vec<3> u = normalized(Vec<3>{uniform_open(rng, -1.0, 1.0), uniform_open(rng, -1.0, 1.0),
                                     uniform_open(rng, -1.0, 1.0)});
        auto r3 = frame_rotation(u);
        CHECK(norm(column(r3, 0) - u) <= 1e-10);
        CHECK(orth_error<3>(r3) <= 1e-12);
        CHECK(std::abs(determinant<3>(r3) - 1.0) <= 1e-12);
    }
    // near -e1 the exponential formula stays accurate
    Vec<3> near = normalized(Vec<3>{-1.0, 1e-9, -2e-9});
    CHECK(norm(column(frame_rotation(near), 0) - near) <= 1e-10);
}

TEST_CASE("velocity chain", "[scattering]")
{
    Vec<2> e1{1.0, 0.0};
    auto none = velocity_chain(e1, {});
    REQUIRE(none.size() == 1);
    CHECK(none[0] == e1);
    std::vector<double> zero{0.0};
    auto back = velocity_chain(e1, zero);
    CHECK(norm(back[1] - Vec<2>{-1.0, 0.0}) < 1e-15);

    auto rng = rng_stream(33, 0);
    std::vector<double> etas(1000000);
    for (auto &e : etas)
        e = uniform_open(rng, -1.0, 1.0);
    auto vs = velocity_chain(Vec<2>{0.6, 0.8}, etas);
    double worst = 0.0;
    for (const auto &v : vs)
        worst = std::max(worst, std::abs(norm(v) - 1.0));
    CHECK(worst <= 1e-10);
}

TEST_CASE("rotation accumulator stays orthogonal over long products", "[scattering]")
{
    RotationAccumulator<3> acc;
    auto rng = rng_stream(34, 0);
    for (int i = 0; i < 200000; ++i)
        acc.apply(scatter_matrix(Vec<2>{uniform_open(rng, -0.7, 0.7), uniform_open(rng, -0.7, 0.7)}));
    CHECK(orth_error<3>(acc.matrix()) <= 1e-12);
    CHECK(acc.count() == 200000);
}

TEST_CASE("hypothesis classification", "[scattering]")
{
    auto hs = classify_theta(ScatterModel::hard_sphere());
    CHECK(hs.hypothesis == Hypothesis::A);
    CHECK(hs.b_theta == Approx(theta_hard_sphere(0.9999)).epsilon(1e-12));

    std::vector<double> w, mirror, flat;
    for (int i = 0; i <= 40; ++i) {
        double x = 0.999 * i / 40.0;
        w.push_back(x);
        mirror.push_back(-pi + 2.0 * std::asin(x));
        flat.push_back(pi / 3.0);
    }
    CHECK(classify_theta(ScatterModel::table(w, mirror)).hypothesis == Hypothesis::B);
    auto c = classify_theta(ScatterModel::table(w, flat));
    CHECK(c.hypothesis == Hypothesis::Neither);
    CHECK(c.b_theta == Approx(pi / 3.0).epsilon(1e-14));
    CHECK(std::string(to_string(Hypothesis::Neither)) == "neither");
}

TEST_CASE("tabulated model interpolates monotonically", "[scattering]")
{
    std::vector<double> w{0.0, 0.2, 0.5, 0.8, 0.95};
    std::vector<double> th;
    for (double x : w)
        th.push_back(theta_hard_sphere(x));
    auto m = ScatterModel::table(w, th);
    for (std::size_t i = 0; i < w.size(); ++i)
        CHECK(m.theta(w[i]) == Approx(th[i]).epsilon(1e-14));
    double prev = m.theta(0.0);
    for (int i = 1; i < 10000; ++i) {
        double t = m.theta(i / 10000.0);
        CHECK(t < prev);
        prev = t;
    }
    CHECK(std::abs(m.theta(0.35) - theta_hard_sphere(0.35)) < 0.02);

    CHECK_THROWS_AS(ScatterModel::table({0.0, 0.1, 0.2}, {1.0, 0.9, 0.8}), std::invalid_argument);
    CHECK_THROWS_AS(ScatterModel::table({0.0, 0.2, 0.1, 0.3}, {1, 1, 1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(ScatterModel::table({0.0, 0.1, 0.2, 1.0}, {1, 1, 1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(m.theta(1.0), std::domain_error);
}

TEST_CASE("tabulated model from CSV", "[scattering]")
{
    auto path = std::filesystem::temp_directory_path() / "lorentz_theta_test.csv";
    {
        std::ofstream out(path);
        out << "w,theta\n0,3.0\n0.25,2.0\n0.5,1.5\n0.75,1.0\n";
    }
    auto m = ScatterModel::from_csv(path.string());
    CHECK(m.kind() == ScatterKind::Table);
    CHECK(m.theta(0.25) == Approx(2.0).epsilon(1e-15));
    {
        std::ofstream out(path);
        out << "w,theta\n0,3.0\n0.25,oops\n";
    }
    CHECK_THROWS_AS(ScatterModel::from_csv(path.string()), std::runtime_error);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(ScatterModel::from_csv(path.string()), std::runtime_error);
}

TEST_CASE("scattering map", "[scattering]")
{
    // head-on: zero impact parameter reverses the direction
    auto out = scatter_map(Vec<2>{1.0, 0.0}, Vec<2>{0.0, 0.0});
    CHECK(norm(out.v_plus - Vec<2>{-1.0, 0.0}) < 1e-15);
    CHECK(norm(out.exit_param) == 0.0);
    auto rng = rng_stream(35, 0);
    for (int i = 0; i < 1000; ++i) {
        double a = uniform_open(rng, -pi, pi), w = uniform_open(rng, -1.0, 1.0);
        Vec<2> v{std::cos(a), std::sin(a)};
        auto o = scatter_map(v, w * perp(v));
        CHECK(std::abs(norm(o.v_plus) - 1.0) <= 1e-12);
        CHECK(std::abs(dot(o.v_plus, o.exit_param)) <= 1e-12);
        CHECK(norm(o.exit_param) == Approx(std::abs(w)).epsilon(1e-12));
    }
}
