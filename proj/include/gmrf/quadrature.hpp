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

#pragma once

#include <complex>
#include <vector>

#include "gmrf/sparse.hpp"
#include "gmrf/spde.hpp"

namespace gmrf {

/// Extremal-eigenvalue estimates with safety margins already applied.
struct SpectralBounds {
    double lambda_min;
    double lambda_max;

    void validate() const;
};

struct SpectralDiagnostics {
    bool ritz_stable = true;  // false when extreme Ritz values were still moving
    int iterations = 0;
};

/// Lanczos estimates of the extremal eigenvalues of SPD Q, widened by the
/// relative safety margin: lambda_max *= (1+margin), lambda_min /= (1+margin).
/// Stops early once both extremes settle. Non-convergence is reported through
/// `diag` (warning state), never thrown.
SpectralBounds estimate_spectral_bounds(const CsrMatrix& q, int iters = 100, double margin = 0.05,
                                        SpectralDiagnostics* diag = nullptr);

/// Exact spectral endpoints of the grid precision Q(kappa, tau), available in
/// closed form because the discrete Laplacian eigenvalues on a box are known.
/// No margin is needed: these are true bounds.
SpectralBounds exact_grid_bounds(const GridSpec& g, const Hyperparams& h);

/// Rational approximation log(Q) v ~= sum_l alpha_l (Q - sigma_l I)^{-1} v.
///
/// weights/shifts come from an N-point midpoint rule on the Jacobi-elliptic
/// conformal map of the annular region between the spectral interval
/// [lambda_min, lambda_max] and the branch cut of the logarithm, following
/// Hale, Higham & Trefethen, SIAM J. Numer. Anal. 46(5), 2008. For even N
/// the nodes form conjugate pairs, so the weighted sum of resolvents is real
/// up to roundoff.
struct QuadratureRule {
    int order = 0;
    std::vector<std::complex<double>> weights;
    std::vector<std::complex<double>> shifts;
    SpectralBounds bounds{1.0, 1.0};
};

/// Builds the N-point log quadrature for the given bounds. Throws
/// std::domain_error when lambda_max/lambda_min overflows the elliptic
/// parameter computation (remediation: raise the lambda_min margin).
QuadratureRule build_log_quadrature(const SpectralBounds& b, int n_points);

/// Re(sum_l alpha_l / (lambda - sigma_l)); approximates log(lambda) on
/// [lambda_min, lambda_max].
double scalar_apply(const QuadratureRule& rule, double lambda);

/// Error model exp(-2*pi*N / (log(lambda_max/lambda_min) + 6)) used to pick
/// the order; deliberately conservative for the interval ratios seen here.
double predicted_scalar_error(const SpectralBounds& b, int n_points);

/// Smallest even N whose predicted scalar error is below safety*rel_tol,
/// capped at `cap`.
int choose_quadrature_order(const SpectralBounds& b, double rel_tol, double safety = 0.1, int cap = 40);

}  // namespace gmrf
