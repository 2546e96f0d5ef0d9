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
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "gmrf/quadrature.hpp"
#include "gmrf/sparse.hpp"

namespace gmrf {

struct SolverConfig {
    double rel_tol = 1e-3;
    int max_iter = 10000;

    void validate() const {
        if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw std::invalid_argument("SolverConfig: rel_tol must be in (0,1)");
        if (max_iter < 1) throw std::invalid_argument("SolverConfig: max_iter must be positive");
    }
};

/// Thrown when an iterative solve runs out of budget; carries the best
/// iterate so callers can inspect the partial result.
class ConvergenceError : public std::runtime_error {
  public:
    ConvergenceError(const std::string& msg, std::vector<double> best, double residual, int iterations)
        : std::runtime_error(msg), best_iterate(std::move(best)), residual_norm(residual), iterations(iterations) {}

    std::vector<double> best_iterate;
    double residual_norm = 0.0;
    int iterations = 0;
};

struct CgResult {
    std::vector<double> x;
    int iterations = 0;
    double residual_norm = 0.0;  // true residual, verified by a final matvec
};

/// Plain conjugate gradients for SPD Q. Guarantees the true residual
/// satisfies ||b - Qx|| <= rel_tol * ||b|| (checked, not just recursed) or
/// throws ConvergenceError.
CgResult cg_solve(const CsrMatrix& q, std::span<const double> b, const SolverConfig& cfg);

/// Result of one multi-shift solve. The shifted solutions share the single
/// real Krylov sequence of the seed system Q x = b; residual_norms holds the
/// post-hoc verified true residuals ||b - (Q - sigma_l I) x_l||.
struct ShiftedSolveResult {
    std::vector<std::vector<std::complex<double>>> solutions;
    std::vector<double> residual_norms;
    std::vector<char> converged;
    int seed_iterations = 0;
    std::int64_t matvec_count = 0;          // matvecs consumed by the iteration itself
    std::int64_t verification_matvecs = 0;  // one per shift, for the final residual check

    bool all_converged() const {
        for (char c : converged) {
            if (!c) return false;
        }
        return true;
    }
};

/// Observer invoked once per seed iteration; zeta[l] relates the implicit
/// shifted residual to the seed residual: r_l = zeta_l * r_seed.
using ShiftedIterationObserver =
    std::function<void(int iteration, std::span<const double> seed_residual,
                       std::span<const std::complex<double>> zeta,
                       const std::vector<std::vector<std::complex<double>>>& solutions)>;

/// COCG-M: solves (Q - sigma_l I) x_l = b for all (complex) shifts from one
/// real CG sequence on Q x = b. Shifted coefficients follow from the shift
/// invariance of the Krylov space, so no extra matrix-vector products are
/// needed; only the 2N shifted iterate/direction vectors are complex.
/// A shift whose scalar recurrence breaks down (|zeta denominator| < 1e-300)
/// is frozen and reported unconverged; the others continue.
ShiftedSolveResult cocg_m_solve(const CsrMatrix& q, std::span<const double> b,
                                std::span<const std::complex<double>> shifts, const SolverConfig& cfg,
                                const ShiftedIterationObserver& observer = nullptr);

struct ApplyLogResult {
    std::vector<double> value;
    double imag_residue_rel = 0.0;  // ||Im sum|| / ||Re sum||, diagnostic
    int seed_iterations = 0;
    std::int64_t matvec_count = 0;
};

/// log(Q) v ~= Re(sum_l alpha_l x_l) with x_l from one cocg_m_solve over the
/// rule's shifts. Throws ConvergenceError if any shift fails to converge.
ApplyLogResult apply_log(const CsrMatrix& q, std::span<const double> v, const QuadratureRule& rule,
                         const SolverConfig& cfg);

}  // namespace gmrf
