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

#include <numbers>

namespace lorentz {

inline constexpr double pi = std::numbers::pi;
inline constexpr double zeta2 = pi * pi / 6.0;
inline constexpr double zeta3 = 1.2020569031595942853997381615114;

/// Peak value 1/zeta(2) of the d=2 kernel.
inline constexpr double kernel_peak = 6.0 / (pi * pi);

/// Volume of the unit ball in R^k for k = 1, 2.
inline constexpr double unit_ball_volume(int k) { return k == 1 ? 2.0 : pi; }

/// Limiting mean free path 1/v_{d-1}.
inline constexpr double mean_free_path(int d) { return 1.0 / unit_ball_volume(d - 1); }

inline constexpr double zeta_of(int d) { return d == 2 ? zeta2 : zeta3; }

/// Tail constant of the free path density, Psi0(x) ~ Theta_d x^-3.
inline constexpr double tail_constant(int d)
{
    double pow2 = d == 2 ? 1.0 : 0.5;
    return pow2 / (d * (d + 1) * zeta_of(d));
}

/// Discrete-time superdiffusive variance sigma_d^2 = 2^{1-d} / (d^2 (d+1) zeta(d)).
inline constexpr double sigma_sq(int d)
{
    double pow2 = d == 2 ? 0.5 : 0.25;
    return pow2 / (d * d * (d + 1) * zeta_of(d));
}

/// Continuous-time variance Sigma_d^2 = sigma_d^2 / mean free path.
inline constexpr double big_sigma_sq(int d) { return sigma_sq(d) / mean_free_path(d); }

/// Doeblin bound on the norm of P - Pi: 1 - 1/(2^d zeta(d)).
inline constexpr double doeblin_bound(int d)
{
    double pow2 = d == 2 ? 4.0 : 8.0;
    return 1.0 - 1.0 / (pow2 * zeta_of(d));
}

/// Tail constant of the conditional mean, P(mu > u) ~ 3/(4 pi^2) / (u^2 log u), d = 2.
inline constexpr double mean_tail_constant_2d = 3.0 / (4.0 * pi * pi);

} // namespace lorentz
