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
#include <array>
#include <cmath>
#include <cstddef>

namespace lorentz {

template <std::size_t D>
using Vec = std::array<double, D>;

/// Row-major D x D matrix.
template <std::size_t D>
using Mat = std::array<std::array<double, D>, D>;

template <std::size_t D>
constexpr double dot(const Vec<D> &a, const Vec<D> &b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < D; ++i)
        s += a[i] * b[i];
    return s;
}

template <std::size_t D>
inline double norm(const Vec<D> &a) { return std::sqrt(dot<D>(a, a)); }

template <std::size_t D>
constexpr Vec<D> operator+(Vec<D> a, const Vec<D> &b)
{
    for (std::size_t i = 0; i < D; ++i)
        a[i] += b[i];
    return a;
}

template <std::size_t D>
constexpr Vec<D> operator-(Vec<D> a, const Vec<D> &b)
{
    for (std::size_t i = 0; i < D; ++i)
        a[i] -= b[i];
    return a;
}

template <std::size_t D>
constexpr Vec<D> operator*(double s, Vec<D> a)
{
    for (auto &x : a)
        x *= s;
    return a;
}

template <std::size_t D>
inline Vec<D> normalized(const Vec<D> &a) { return (1.0 / norm<D>(a)) * a; }

template <std::size_t D>
constexpr Vec<D> unit(std::size_t axis)
{
    Vec<D> e{};
    e[axis] = 1.0;
    return e;
}

/// Counter-clockwise quarter turn of a plane vector.
constexpr Vec<2> perp(const Vec<2> &v) { return {-v[1], v[0]}; }

/// z-component of the planar cross product, a x b.
inline double cross(const Vec<2> &a, const Vec<2> &b) { return std::fma(a[0], b[1], -a[1] * b[0]); }

template <std::size_t D>
constexpr Mat<D> identity()
{
    Mat<D> m{};
    for (std::size_t i = 0; i < D; ++i)
        m[i][i] = 1.0;
    return m;
}

template <std::size_t D>
constexpr Mat<D> operator*(const Mat<D> &a, const Mat<D> &b)
{
    Mat<D> c{};
    for (std::size_t i = 0; i < D; ++i)
        for (std::size_t k = 0; k < D; ++k)
            for (std::size_t j = 0; j < D; ++j)
                c[i][j] += a[i][k] * b[k][j];
    return c;
}

template <std::size_t D>
constexpr Vec<D> operator*(const Mat<D> &a, const Vec<D> &v)
{
    Vec<D> r{};
    for (std::size_t i = 0; i < D; ++i)
        for (std::size_t j = 0; j < D; ++j)
            r[i] += a[i][j] * v[j];
    return r;
}

template <std::size_t D>
constexpr Mat<D> transpose(const Mat<D> &a)
{
    Mat<D> t{};
    for (std::size_t i = 0; i < D; ++i)
        for (std::size_t j = 0; j < D; ++j)
            t[i][j] = a[j][i];
    return t;
}

template <std::size_t D>
constexpr Vec<D> column(const Mat<D> &a, std::size_t j)
{
    Vec<D> c{};
    for (std::size_t i = 0; i < D; ++i)
        c[i] = a[i][j];
    return c;
}

template <std::size_t D>
double determinant(const Mat<D> &a)
{
    static_assert(D == 2 || D == 3);
    if constexpr (D == 2)
        return a[0][0] * a[1][1] - a[0][1] * a[1][0];
    else
        return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
             - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
             + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

/// max |A^T A - I| entry.
template <std::size_t D>
double orthogonality_defect(const Mat<D> &a)
{
    auto g = transpose<D>(a) * a;
    double worst = 0.0;
    for (std::size_t i = 0; i < D; ++i)
        for (std::size_t j = 0; j < D; ++j)
            worst = std::max(worst, std::abs(g[i][j] - (i == j ? 1.0 : 0.0)));
    return worst;
}

/// Modified Gram-Schmidt on the columns; keeps the orientation of the input.
template <std::size_t D>
Mat<D> reorthonormalize(const Mat<D> &a)
{
    std::array<Vec<D>, D> cols;
    for (std::size_t j = 0; j < D; ++j) {
        Vec<D> c = column<D>(a, j);
        for (std::size_t k = 0; k < j; ++k)
            c = c - dot<D>(cols[k], c) * cols[k];
        cols[j] = normalized<D>(c);
    }
    Mat<D> r{};
    for (std::size_t i = 0; i < D; ++i)
        for (std::size_t j = 0; j < D; ++j)
            r[i][j] = cols[j][i];
    return r;
}

} // namespace lorentz
