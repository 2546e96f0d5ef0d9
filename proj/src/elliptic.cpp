/*
 * Copyright (c) 2026, the gmrflogdet authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "gmrf/elliptic.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace gmrf {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kPi = std::numbers::pi;

double agm_quarter_period(double a0, double b0) {
    // K = pi / (2 * AGM(a0, b0)).
    double a = a0, b = b0;
    for (int i = 0; i < 64 && std::abs(a - b) > kEps * a; ++i) {
        const double an = 0.5 * (a + b);
        b = std::sqrt(a * b);
        a = an;
    }
    return kPi / (2.0 * a);
}

// Landen recursion; on the first level m = exp(-2*pi*L), deeper levels pass
// the reduced parameter directly.
JacobiValues ellipjc_rec(std::complex<double> u, double m) {
    if (m < 4.0 * kEps) {
        const std::complex<double> sinu = std::sin(u);
        const std::complex<double> cosu = std::cos(u);
        JacobiValues v;
        v.sn = sinu + 0.25 * m * (sinu * cosu - u) * cosu;
        v.cn = cosu + 0.25 * m * (-sinu * cosu + u) * sinu;
        v.dn = 1.0 + 0.25 * m * (cosu * cosu - sinu * sinu - 1.0);
        return v;
    }
    double kappa;
    if (m > 1e-3) {
        const double sq = std::sqrt(1.0 - m);
        kappa = (1.0 - sq) / (1.0 + sq);
    } else {
        // Taylor series of (1-sqrt(1-m))/(1+sqrt(1-m)) in x = m/4.
        const double x = 0.25 * m;
        kappa = x * (1.0 + x * (2.0 + x * (5.0 + x * (14.0 + x * (42.0 + x * 132.0)))));
    }
    const double mu = kappa * kappa;
    const JacobiValues inner = ellipjc_rec(u / (1.0 + kappa), mu);
    const std::complex<double> denom = 1.0 + kappa * inner.sn * inner.sn;
    JacobiValues v;
    v.sn = (1.0 + kappa) * inner.sn / denom;
    v.cn = inner.cn * inner.dn / denom;
    v.dn = (1.0 - kappa * inner.sn * inner.sn) / denom;
    return v;
}

}  // namespace

void ellipkkp(double big_l, double& k, double& kp) {
    if (!(big_l > 0.0)) throw std::domain_error("ellipkkp: L must be positive");
    if (big_l > 10.0) {
        k = kPi / 2.0;
        kp = kPi * big_l + std::log(4.0);
        return;
    }
    const double m = std::exp(-2.0 * kPi * big_l);
    k = agm_quarter_period(1.0, std::sqrt(1.0 - m));
    kp = agm_quarter_period(1.0, std::sqrt(m));
}

JacobiValues ellipjc(std::complex<double> u, double big_l) {
    if (!(big_l > 0.0)) throw std::domain_error("ellipjc: L must be positive");
    double k, kp;
    ellipkkp(big_l, k, kp);
    const double m = std::exp(-2.0 * kPi * big_l);

    // Arguments in the upper half of the rectangle are reflected down and
    // mapped back through sn(i*K' - u) = 1/(k*sn(u)).
    const bool high = u.imag() > 0.5 * kp;
    if (high) u = std::complex<double>(0.0, kp) - u;

    JacobiValues v = ellipjc_rec(u, m);
    if (high) {
        const std::complex<double> i(0.0, 1.0);
        const double sqm = std::sqrt(m);
        const JacobiValues low = v;
        v.sn = -1.0 / (sqm * low.sn);
        v.cn = i * low.dn / (sqm * low.sn);
        v.dn = i * low.cn / low.sn;
    }
    return v;
}

}  // namespace gmrf
