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

#include "gmrf/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gmrf/elliptic.hpp"
#include "gmrf/rng.hpp"

namespace gmrf {

namespace {

constexpr double kPi = std::numbers::pi;

// Eigenvalues of T_m < x via the Sturm sequence of the shifted LDL^T pivots.
int sturm_count_below(const std::vector<double>& diag, const std::vector<double>& off, double x) {
    int count = 0;
    double d = 1.0;
    for (std::size_t i = 0; i < diag.size(); ++i) {
        const double b = (i == 0) ? 0.0 : off[i - 1];
        d = diag[i] - x - b * b / d;
        if (d == 0.0) d = -1e-300;
        if (d < 0.0) ++count;
    }
    return count;
}

void tridiag_extremes(const std::vector<double>& diag, const std::vector<double>& off, double& lo_eig,
                      double& hi_eig) {
    const int m = static_cast<int>(diag.size());
    double lo = diag[0], hi = diag[0];
    for (int i = 0; i < m; ++i) {
        const double bl = (i > 0) ? std::abs(off[i - 1]) : 0.0;
        const double br = (i + 1 < m) ? std::abs(off[i]) : 0.0;
        lo = std::min(lo, diag[i] - bl - br);
        hi = std::max(hi, diag[i] + bl + br);
    }
    auto bisect = [&](int want_below) {
        double a = lo, b = hi;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (a + b);
            if (sturm_count_below(diag, off, mid) >= want_below) {
                b = mid;
            } else {
                a = mid;
            }
        }
        return 0.5 * (a + b);
    };
    lo_eig = bisect(1);
    hi_eig = bisect(m);
}

}  // namespace

void SpectralBounds::validate() const {
    if (!(lambda_min > 0.0) || !(lambda_max >= lambda_min)) {
        throw std::invalid_argument("SpectralBounds: need 0 < lambda_min <= lambda_max");
    }
}

SpectralBounds estimate_spectral_bounds(const CsrMatrix& q, int iters, double margin,
                                        SpectralDiagnostics* diag) {
    if (iters < 10) throw std::invalid_argument("estimate_spectral_bounds: iters must be >= 10");
    const index_t n = q.rows();
    const int max_steps = static_cast<int>(std::min<index_t>(iters, n));

    std::vector<double> v(static_cast<std::size_t>(n)), v_prev(static_cast<std::size_t>(n), 0.0),
        w(static_cast<std::size_t>(n));
    double norm = 0.0;
    for (index_t i = 0; i < n; ++i) {
        v[static_cast<std::size_t>(i)] = uniform_pm1(0x5eedULL, 7, static_cast<std::uint64_t>(i));
        norm += v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
    }
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;

    std::vector<double> alpha, beta;
    std::vector<double> lo_hist, hi_hist;
    double beta_prev = 0.0;
    bool stable = false;
    int steps = 0;
    for (int j = 0; j < max_steps; ++j) {
        q.matvec(v, w);
        for (index_t i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] -= beta_prev * v_prev[static_cast<std::size_t>(i)];
        double a = 0.0;
        for (index_t i = 0; i < n; ++i) a += w[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
        for (index_t i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] -= a * v[static_cast<std::size_t>(i)];
        double b = 0.0;
        for (double x : w) b += x * x;
        b = std::sqrt(b);
        alpha.push_back(a);
        beta.push_back(b);
        steps = j + 1;

        double lo = 0.0, hi = 0.0;
        tridiag_extremes(alpha, std::vector<double>(beta.begin(), beta.end() - 1), lo, hi);
        lo_hist.push_back(lo);
        hi_hist.push_back(hi);
        if (steps >= 10) {
            const double dlo = std::abs(lo - lo_hist[static_cast<std::size_t>(steps - 6)]);
            const double dhi = std::abs(hi - hi_hist[static_cast<std::size_t>(steps - 6)]);
            if (dlo <= 1e-4 * std::abs(lo) && dhi <= 1e-4 * std::abs(hi)) {
                stable = true;
                break;
            }
        }
        if (b <= 1e-13 * std::abs(a)) {
            stable = true;  // invariant subspace: the tridiagonal is exact
            break;
        }
        for (index_t i = 0; i < n; ++i) {
            v_prev[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)];
            v[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(i)] / b;
        }
        beta_prev = b;
    }

    double lo = lo_hist.back(), hi = hi_hist.back();
    if (!(lo > 0.0)) lo = std::max(lo, 1e-14 * std::max(hi, 1.0));
    SpectralBounds bounds{lo / (1.0 + margin), hi * (1.0 + margin)};
    bounds.validate();
    if (diag != nullptr) {
        diag->ritz_stable = stable || steps == static_cast<int>(q.rows());
        diag->iterations = steps;
    }
    return bounds;
}

SpectralBounds exact_grid_bounds(const GridSpec& g, const Hyperparams& h) {
    g.validate();
    h.validate();
    double mu_min = 0.0, mu_max = 0.0;
    for (index_t e : g.extents) {
        const double ed = static_cast<double>(e);
        if (g.boundary == Boundary::Neumann) {
            mu_min += 0.0;
            mu_max += 2.0 - 2.0 * std::cos(kPi * (ed - 1.0) / ed);
        } else {
            mu_min += 2.0 - 2.0 * std::cos(kPi / (ed + 1.0));
            mu_max += 2.0 - 2.0 * std::cos(kPi * ed / (ed + 1.0));
        }
    }
    const double t2 = h.tau * h.tau;
    const double lo = h.kappa + mu_min;
    const double hi = h.kappa + mu_max;
    return SpectralBounds{t2 * lo * lo, t2 * hi * hi};
}

QuadratureRule build_log_quadrature(const SpectralBounds& b, int n_points) {
    b.validate();
    if (n_points < 2) throw std::invalid_argument("build_log_quadrature: N must be >= 2");

    double m = b.lambda_min;
    double big_m = b.lambda_max;
    const double ratio = big_m / m;
    if (!std::isfinite(ratio) || ratio > 1e30) {
        throw std::domain_error(
            "build_log_quadrature: lambda_max/lambda_min overflows the elliptic parameter "
            "computation; raise the lambda_min margin");
    }
    if (ratio < 1.0 + 1e-12) {
        // Degenerate interval: widen symmetrically in log scale so the
        // conformal map stays nonsingular. The geometric midpoint is then
        // reproduced to machine accuracy for any N.
        const double c = std::sqrt(m * big_m);
        m = c * (1.0 - 1e-12);
        big_m = c * (1.0 + 1e-12);
    }

    const double sr = std::sqrt(big_m / m);
    const double k = (sr - 1.0) / (sr + 1.0);
    const double big_l = -std::log1p(-2.0 / (sr + 1.0)) / kPi;
    double big_k = 0.0, big_kp = 0.0;
    ellipkkp(big_l, big_k, big_kp);

    const double geo = std::sqrt(m * big_m);
    const std::complex<double> prefactor =
        std::complex<double>(0.0, -1.0) * (4.0 * big_k * geo / (k * kPi * static_cast<double>(n_points)));

    QuadratureRule rule;
    rule.order = n_points;
    rule.bounds = b;
    rule.weights.resize(static_cast<std::size_t>(n_points));
    rule.shifts.resize(static_cast<std::size_t>(n_points));

    // Midpoints of one full 4K period of the map at height K'/2. The second
    // half of the period retraces the conjugate arc; for even N we write it
    // as exact conjugates of the first half so the pairing is bitwise.
    const int direct = (n_points % 2 == 0) ? n_points / 2 : n_points;
    for (int j = 0; j < direct; ++j) {
        const double x = -big_k + (j + 0.5) * (4.0 * big_k / n_points);
        const JacobiValues jv = ellipjc({x, 0.5 * big_kp}, big_l);
        const std::complex<double> denom = 1.0 / k - jv.sn;
        const std::complex<double> z = geo * (1.0 / k + jv.sn) / denom;
        const std::complex<double> dzdt = jv.cn * jv.dn / (denom * denom);
        rule.shifts[static_cast<std::size_t>(j)] = z;
        rule.weights[static_cast<std::size_t>(j)] = prefactor * std::log(z) * dzdt;
    }
    if (n_points % 2 == 0) {
        const int half = n_points / 2;
        for (int j = 0; j < half; ++j) {
            rule.shifts[static_cast<std::size_t>(half + j)] = std::conj(rule.shifts[static_cast<std::size_t>(half - 1 - j)]);
            rule.weights[static_cast<std::size_t>(half + j)] = std::conj(rule.weights[static_cast<std::size_t>(half - 1 - j)]);
        }
    }
    return rule;
}

double scalar_apply(const QuadratureRule& rule, double lambda) {
    std::complex<double> sum = 0.0;
    for (std::size_t l = 0; l < rule.weights.size(); ++l) {
        sum += rule.weights[l] / (lambda - rule.shifts[l]);
    }
    return sum.real();
}

double predicted_scalar_error(const SpectralBounds& b, int n_points) {
    b.validate();
    const double ratio = std::max(b.lambda_max / b.lambda_min, 1.0 + 1e-15);
    return std::exp(-2.0 * kPi * n_points / (std::log(ratio) + 6.0));
}

int choose_quadrature_order(const SpectralBounds& b, double rel_tol, double safety, int cap) {
    b.validate();
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw std::invalid_argument("choose_quadrature_order: bad tolerance");
    const double target = safety * rel_tol;
    const double ratio = std::max(b.lambda_max / b.lambda_min, 1.0 + 1e-15);
    const double n_exact = (std::log(ratio) + 6.0) * std::log(1.0 / target) / (2.0 * kPi);
    int n = static_cast<int>(std::ceil(n_exact));
    n += n % 2;  // conjugate pairing wants even N
    return std::clamp(n, 2, cap);
}

}  // namespace gmrf
