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

#include "gmrf/krylov.hpp"

#include <algorithm>
#include <cmath>

namespace gmrf {

namespace {

using cd = std::complex<double>;

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// y = b - (Q - sigma I) x for complex x, in one sweep over the pattern.
// Counts as a single (complex) matvec.
double shifted_true_residual(const CsrMatrix& q, std::span<const double> b, cd sigma,
                             const std::vector<cd>& x) {
    const index_t n = q.rows();
    double s = 0.0;
    for (index_t i = 0; i < n; ++i) {
        cd acc = 0.0;
        const auto cols = q.row_cols(i);
        const auto vals = q.row_values(i);
        for (std::size_t t = 0; t < cols.size(); ++t) acc += vals[t] * x[static_cast<std::size_t>(cols[t])];
        acc -= sigma * x[static_cast<std::size_t>(i)];
        const cd r = b[static_cast<std::size_t>(i)] - acc;
        s += std::norm(r);
    }
    return std::sqrt(s);
}

}  // namespace

CgResult cg_solve(const CsrMatrix& q, std::span<const double> b, const SolverConfig& cfg) {
    cfg.validate();
    const index_t n = q.rows();
    if (static_cast<index_t>(b.size()) != n) throw std::invalid_argument("cg_solve: dimension mismatch");

    const double nb = norm2(b);
    CgResult res;
    res.x.assign(static_cast<std::size_t>(n), 0.0);
    if (nb == 0.0) return res;
    const double target = cfg.rel_tol * nb;

    std::vector<double> r(b.begin(), b.end());
    std::vector<double> p = r;
    std::vector<double> ap(static_cast<std::size_t>(n));
    double rr = dot(r, r);

    int k = 0;
    while (k < cfg.max_iter) {
        q.matvec(p, ap);
        ++k;
        const double alpha = rr / dot(p, ap);
        for (std::size_t i = 0; i < res.x.size(); ++i) {
            res.x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        const double rr_new = dot(r, r);
        if (std::sqrt(rr_new) <= target) {
            // Recursive residual can drift from the true one; verify and
            // continue from the refreshed residual if needed.
            q.matvec(res.x, ap);
            double true_rr = 0.0;
            for (std::size_t i = 0; i < r.size(); ++i) {
                r[i] = b[i] - ap[i];
                true_rr += r[i] * r[i];
            }
            res.residual_norm = std::sqrt(true_rr);
            if (res.residual_norm <= target) {
                res.iterations = k;
                return res;
            }
            rr = true_rr;
            p = r;
            continue;
        }
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
    }
    throw ConvergenceError("cg_solve: max_iter reached", std::move(res.x), std::sqrt(rr), k);
}

ShiftedSolveResult cocg_m_solve(const CsrMatrix& q, std::span<const double> b,
                                std::span<const cd> shifts, const SolverConfig& cfg,
                                const ShiftedIterationObserver& observer) {
    cfg.validate();
    const index_t n = q.rows();
    if (static_cast<index_t>(b.size()) != n) throw std::invalid_argument("cocg_m_solve: dimension mismatch");
    const std::size_t ns = shifts.size();

    ShiftedSolveResult res;
    res.solutions.assign(ns, std::vector<cd>(static_cast<std::size_t>(n), cd(0.0)));
    res.residual_norms.assign(ns, 0.0);
    res.converged.assign(ns, 0);

    const double nb = norm2(b);
    if (nb == 0.0) {
        res.converged.assign(ns, 1);
        return res;
    }
    const double target = cfg.rel_tol * nb;

    // Seed CG state (real arithmetic only).
    std::vector<double> r(b.begin(), b.end());
    std::vector<double> p = r;
    std::vector<double> ap(static_cast<std::size_t>(n));
    double rr = dot(r, r);
    double alpha_prev = 1.0, beta_prev = 0.0;

    // Per-shift state: u_k = P_k(sigma) with the CG residual polynomial P_k,
    // so the implicit shifted residual is r / u_k. Directions start at b.
    std::vector<std::vector<cd>> dir(ns, std::vector<cd>(b.begin(), b.end()));
    std::vector<cd> u_prev(ns, cd(1.0)), u_cur(ns, cd(1.0));
    enum : char { kActive = 0, kEstimated = 1, kDead = 2 };
    std::vector<char> state(ns, kActive);
    std::vector<cd> zeta(ns, cd(1.0));

    auto active_left = [&]() {
        for (char s : state) {
            if (s == kActive) return true;
        }
        return false;
    };

    int k = 0;
    while (active_left() && k < cfg.max_iter) {
        if (rr == 0.0) {  // seed solved exactly; shifted residuals are zero too
            for (char& s : state) {
                if (s == kActive) s = kEstimated;
            }
            break;
        }
        q.matvec(p, ap);
        ++res.matvec_count;
        const double pap = dot(p, ap);
        const double alpha = rr / pap;
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= alpha * ap[i];
        const double rr_new = dot(r, r);
        const double beta = rr_new / rr;
        const double rnorm = std::sqrt(rr_new);

        for (std::size_t l = 0; l < ns; ++l) {
            if (state[l] != kActive) continue;
            // Three-term recurrence of P_k evaluated at the shift.
            const double ratio = (k == 0) ? 0.0 : alpha * beta_prev / alpha_prev;
            const cd u_next = (1.0 + ratio - alpha * shifts[l]) * u_cur[l] - ratio * u_prev[l];
            if (std::abs(u_next) < 1e-300) {
                state[l] = kDead;
                continue;
            }
            const cd shift_alpha = alpha * (u_cur[l] / u_next);
            auto& x = res.solutions[l];
            auto& pl = dir[l];
            for (std::size_t i = 0; i < x.size(); ++i) x[i] += shift_alpha * pl[i];
            const cd ratio_u = u_cur[l] / u_next;
            const cd shift_beta = beta * ratio_u * ratio_u;
            const cd inv_u = 1.0 / u_next;
            for (std::size_t i = 0; i < pl.size(); ++i) pl[i] = inv_u * r[i] + shift_beta * pl[i];
            u_prev[l] = u_cur[l];
            u_cur[l] = u_next;
            zeta[l] = inv_u;
            // Freeze slightly below target so collinearity roundoff cannot
            // push the verified true residual back over it.
            if (rnorm * std::abs(inv_u) <= 0.9 * target) state[l] = kEstimated;
        }

        ++k;
        if (observer) observer(k, r, zeta, res.solutions);

        rr = rr_new;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
        alpha_prev = alpha;
        beta_prev = beta;
    }
    res.seed_iterations = k;

    for (std::size_t l = 0; l < ns; ++l) {
        res.residual_norms[l] = shifted_true_residual(q, b, shifts[l], res.solutions[l]);
        ++res.verification_matvecs;
        res.converged[l] = res.residual_norms[l] <= target ? 1 : 0;
    }
    return res;
}

ApplyLogResult apply_log(const CsrMatrix& q, std::span<const double> v, const QuadratureRule& rule,
                         const SolverConfig& cfg) {
    const ShiftedSolveResult solve = cocg_m_solve(q, v, rule.shifts, cfg);
    if (!solve.all_converged()) {
        int failed = 0;
        for (char c : solve.converged) failed += (c == 0);
        throw ConvergenceError("apply_log: " + std::to_string(failed) + " of " +
                                   std::to_string(rule.shifts.size()) + " shifted systems unconverged",
                               {}, 0.0, solve.seed_iterations);
    }

    ApplyLogResult out;
    out.seed_iterations = solve.seed_iterations;
    out.matvec_count = solve.matvec_count;
    const std::size_t n = v.size();
    std::vector<cd> acc(n, cd(0.0));
    for (std::size_t l = 0; l < rule.weights.size(); ++l) {
        const cd w = rule.weights[l];
        const auto& x = solve.solutions[l];
        for (std::size_t i = 0; i < n; ++i) acc[i] += w * x[i];
    }
    out.value.resize(n);
    double re2 = 0.0, im2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out.value[i] = acc[i].real();
        re2 += acc[i].real() * acc[i].real();
        im2 += acc[i].imag() * acc[i].imag();
    }
    out.imag_residue_rel = std::sqrt(im2) / std::max(std::sqrt(re2), 1e-300);
    return out;
}

}  // namespace gmrf
