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

#include "gmrf/likelihood.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "gmrf/rng.hpp"

namespace gmrf {

namespace {

double quadratic_form(const CsrMatrix& q, std::span<const double> x) {
    double s = 0.0;
    std::vector<double> qx = q.matvec(x);
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * qx[i];
    return s;
}

detail::RawCsr noise_precision_raw(const std::variant<double, CsrMatrix>& q1, index_t m) {
    if (std::holds_alternative<double>(q1)) {
        const double q = std::get<double>(q1);
        if (!(q > 0.0)) throw std::invalid_argument("noise precision must be positive");
        detail::RawCsr raw;
        raw.n = m;
        raw.offsets.resize(static_cast<std::size_t>(m) + 1);
        raw.cols.resize(static_cast<std::size_t>(m));
        raw.vals.assign(static_cast<std::size_t>(m), q);
        for (index_t i = 0; i <= m; ++i) raw.offsets[static_cast<std::size_t>(i)] = i;
        for (index_t i = 0; i < m; ++i) raw.cols[static_cast<std::size_t>(i)] = i;
        return raw;
    }
    return detail::to_raw(std::get<CsrMatrix>(q1));
}

}  // namespace

double gmrf_neg_loglik(std::span<const double> x, const Hyperparams& h, const GridSpec& g,
                       const LogDetFn& logdet_fn) {
    g.validate();
    h.validate();
    if (static_cast<index_t>(x.size()) != g.size()) {
        throw std::invalid_argument("gmrf_neg_loglik: observation has wrong dimension");
    }
    const CsrMatrix q = build_precision(g, h);
    const double n = static_cast<double>(g.size());
    return -0.5 * logdet_fn(q) + 0.5 * quadratic_form(q, x) + 0.5 * n * std::log(2.0 * std::numbers::pi);
}

double gauss_linear_objective(const GaussLinearModel& m, std::span<const double> x,
                              std::span<const double> y, std::span<const double> eta,
                              std::span<const double> theta, const LogDetFn& logdet_fn) {
    if (!m.prior_precision) throw std::invalid_argument("gauss_linear_objective: prior_precision not set");
    const CsrMatrix qx = m.prior_precision(eta);
    if (static_cast<index_t>(x.size()) != qx.rows()) throw std::invalid_argument("gauss_linear_objective: x dimension mismatch");

    // Residual y - A x.
    std::vector<double> r(y.begin(), y.end());
    if (m.forward.has_value()) {
        const CsrMatrix& a = *m.forward;
        if (a.rows() != static_cast<index_t>(y.size())) throw std::invalid_argument("gauss_linear_objective: y dimension mismatch");
        std::vector<double> ax = a.matvec(x);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= ax[i];
    } else {
        if (x.size() != y.size()) throw std::invalid_argument("gauss_linear_objective: identity forward needs dim(x)==dim(y)");
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= x[i];
    }

    double noise_quad = 0.0;
    double logdet_q1 = 0.0;
    if (std::holds_alternative<double>(m.noise_precision)) {
        const double q1 = std::get<double>(m.noise_precision);
        if (!(q1 > 0.0)) throw std::invalid_argument("gauss_linear_objective: noise precision must be positive");
        for (double v : r) noise_quad += q1 * v * v;
        logdet_q1 = static_cast<double>(r.size()) * std::log(q1);
    } else {
        const CsrMatrix& q1 = std::get<CsrMatrix>(m.noise_precision);
        if (q1.rows() != static_cast<index_t>(r.size())) throw std::invalid_argument("gauss_linear_objective: Q1 dimension mismatch");
        noise_quad = quadratic_form(q1, r);
        logdet_q1 = logdet_fn(q1);
    }

    std::vector<double> d(x.begin(), x.end());
    if (!m.prior_mean.empty()) {
        if (m.prior_mean.size() != d.size()) throw std::invalid_argument("gauss_linear_objective: prior mean dimension mismatch");
        for (std::size_t i = 0; i < d.size(); ++i) d[i] -= m.prior_mean[i];
    }
    const double prior_quad = quadratic_form(qx, d);

    double phi = 0.5 * noise_quad - 0.5 * logdet_q1 + 0.5 * prior_quad - 0.5 * logdet_fn(qx);
    if (m.log_prior_eta) phi -= m.log_prior_eta(eta);
    if (m.log_prior_theta) phi -= m.log_prior_theta(theta);
    return phi;
}

Posterior posterior_mode(const GaussLinearModel& m, std::span<const double> y,
                         std::span<const double> eta, std::span<const double> theta,
                         const SolverConfig& cfg) {
    (void)theta;  // the desk-scale forward operator does not depend on theta
    if (!m.prior_precision) throw std::invalid_argument("posterior_mode: prior_precision not set");
    const CsrMatrix qx = m.prior_precision(eta);
    const index_t n = qx.rows();
    const index_t mdim = static_cast<index_t>(y.size());

    detail::RawCsr q1 = noise_precision_raw(m.noise_precision, mdim);
    detail::RawCsr data_term;
    std::vector<double> rhs(static_cast<std::size_t>(n), 0.0);
    if (m.forward.has_value()) {
        const detail::RawCsr a = detail::to_raw(*m.forward);
        const detail::RawCsr at = detail::raw_transpose(a);
        data_term = detail::raw_multiply(detail::raw_multiply(at, q1), a);
        // rhs += A^T Q_1 y
        std::vector<double> q1y(static_cast<std::size_t>(mdim), 0.0);
        for (index_t i = 0; i < mdim; ++i) {
            double acc = 0.0;
            for (index_t t = q1.offsets[i]; t < q1.offsets[i + 1]; ++t) acc += q1.vals[t] * y[static_cast<std::size_t>(q1.cols[t])];
            q1y[static_cast<std::size_t>(i)] = acc;
        }
        for (index_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (index_t t = at.offsets[i]; t < at.offsets[i + 1]; ++t) acc += at.vals[t] * q1y[static_cast<std::size_t>(at.cols[t])];
            rhs[static_cast<std::size_t>(i)] = acc;
        }
    } else {
        if (mdim != n) throw std::invalid_argument("posterior_mode: identity forward needs dim(y)==dim(x)");
        data_term = q1;
        for (index_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (index_t t = q1.offsets[i]; t < q1.offsets[i + 1]; ++t) acc += q1.vals[t] * y[static_cast<std::size_t>(q1.cols[t])];
            rhs[static_cast<std::size_t>(i)] = acc;
        }
    }

    detail::RawCsr qp_raw = detail::raw_add(detail::to_raw(qx), data_term);
    CsrMatrix qp = CsrMatrix::from_csr(qp_raw.n, std::move(qp_raw.offsets), std::move(qp_raw.cols),
                                       std::move(qp_raw.vals));

    if (!m.prior_mean.empty()) {
        std::vector<double> qx_mu = qx.matvec(m.prior_mean);
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += qx_mu[i];
    }
    CgResult sol = cg_solve(qp, rhs, cfg);
    return Posterior{std::move(qp), std::move(sol.x)};
}

std::vector<SchedulePhase> parse_schedule(const std::string& text) {
    std::vector<SchedulePhase> phases;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        const auto colon = part.find(':');
        if (colon == std::string::npos) throw std::invalid_argument("bad schedule '" + text + "' (want k:iters,...)");
        SchedulePhase ph;
        ph.k = std::stoi(part.substr(0, colon));
        ph.max_iters = std::stoi(part.substr(colon + 1));
        if (ph.k < 1 || ph.max_iters < 1) throw std::invalid_argument("bad schedule '" + text + "'");
        phases.push_back(ph);
    }
    if (phases.empty()) throw std::invalid_argument("empty schedule");
    for (std::size_t i = 1; i < phases.size(); ++i) {
        if (phases[i].k <= phases[i - 1].k) throw std::invalid_argument("schedule ks must be ascending");
    }
    return phases;
}

namespace {

// 2x2 symmetric eigen-decomposition; floors eigenvalues at
// 1e-6 * max(|eig|) to make the Newton system positive definite.
std::array<double, 2> floored_newton_step(const std::array<double, 3>& hess,
                                          const std::array<double, 2>& grad) {
    const double a = hess[0], b = hess[1], c = hess[2];  // [[a, b], [b, c]]
    const double tr = a + c;
    const double disc = std::sqrt(std::max(0.0, 0.25 * (a - c) * (a - c) + b * b));
    double l1 = 0.5 * tr + disc, l2 = 0.5 * tr - disc;
    const double scale = std::max(std::abs(l1), std::abs(l2));
    const double floor_val = scale > 0.0 ? 1e-6 * scale : 1.0;
    l1 = std::max(l1, floor_val);
    l2 = std::max(l2, floor_val);

    // Eigenvector for l1.
    double v1x, v1y;
    if (std::abs(b) > 1e-300) {
        v1x = l1 - c;
        v1y = b;
    } else {
        v1x = a >= c ? 1.0 : 0.0;
        v1y = a >= c ? 0.0 : 1.0;
    }
    const double nv = std::hypot(v1x, v1y);
    v1x /= nv;
    v1y /= nv;
    const double v2x = -v1y, v2y = v1x;

    // step = -H_floored^{-1} g
    const double g1 = v1x * grad[0] + v1y * grad[1];
    const double g2 = v2x * grad[0] + v2y * grad[1];
    return {-(g1 / l1) * v1x - (g2 / l2) * v2x, -(g1 / l1) * v1y - (g2 / l2) * v2y};
}

}  // namespace

FitResult fit_hyperparams(std::span<const double> x_obs, const GridSpec& g, const Hyperparams& init,
                          std::span<const SchedulePhase> schedule, const FitOptions& opts) {
    g.validate();
    init.validate();
    opts.solver.validate();
    if (static_cast<index_t>(x_obs.size()) != g.size()) throw std::invalid_argument("fit_hyperparams: data has wrong dimension");
    if (schedule.empty()) throw std::invalid_argument("fit_hyperparams: empty schedule");

    const bool probing =
        !opts.custom_logdet && !opts.custom_grid_logdet && opts.method == LogDetMethod::Probing;

    FitResult result;
    result.estimate = init;
    OptimizerTrace& trace = result.trace;

    std::array<double, 2> theta = {std::log(init.kappa), std::log(init.tau)};
    const double h = opts.fd_step;
    std::string termination = "budget_exhausted";

    // The adjacency structure of Q is theta-independent, so each phase can
    // reuse one coloring.
    for (std::size_t phase = 0; phase < schedule.size(); ++phase) {
        const SchedulePhase& ph = schedule[phase];
        const bool final_phase = (phase + 1 == schedule.size());
        const double grad_tol = final_phase ? opts.final_grad_tol : opts.phase_grad_tol;
        const std::uint64_t phase_seed = mix_seed(opts.seed, 1000 + phase, 0);

        Coloring coloring;
        int quad_n = opts.quad_order;
        if (probing) {
            const Hyperparams hp{std::exp(theta[0]), std::exp(theta[1])};
            const CsrMatrix q0 = build_precision(g, hp);
            coloring = color_distance_k(AdjacencyGraph(q0), ph.k);
            if (quad_n == 0) {
                // Freeze the order for the phase so finite differences see a
                // smooth objective.
                quad_n = choose_quadrature_order(exact_grid_bounds(g, hp), opts.solver.rel_tol);
            }
        }

        auto phi = [&](const std::array<double, 2>& t) {
            // Out-of-box candidates (a floored Hessian can propose huge
            // steps) read as +inf and get rejected by the line search.
            if (std::abs(t[0]) > 40.0 || std::abs(t[1]) > 40.0) {
                return std::numeric_limits<double>::infinity();
            }
            const Hyperparams hp{std::exp(t[0]), std::exp(t[1])};
            LogDetFn logdet_fn;
            if (opts.custom_grid_logdet) {
                logdet_fn = [&](const CsrMatrix&) { return opts.custom_grid_logdet(g, hp); };
            } else if (opts.custom_logdet) {
                logdet_fn = opts.custom_logdet;
            } else if (opts.method == LogDetMethod::ExactDense) {
                logdet_fn = [&](const CsrMatrix& q) { return logdet_exact_dense(q, opts.dense_cap); };
            } else {
                logdet_fn = [&](const CsrMatrix& q) {
                    const QuadratureRule rule = build_log_quadrature(exact_grid_bounds(g, hp), quad_n);
                    return logdet_probing(q, coloring, rule, opts.solver, opts.probing_mode, phase_seed,
                                          opts.threads)
                        .value;
                };
            }
            return gmrf_neg_loglik(x_obs, hp, g, logdet_fn);
        };

        double phi0 = phi(theta);
        int iters_used = 0;
        double grad_norm = 0.0;
        for (int it = 0; it < ph.max_iters; ++it) {
            // Central differences for gradient and Hessian.
            std::array<double, 2> gvec{};
            std::array<double, 3> hess{};
            std::array<double, 2> tp = theta, tm = theta;
            std::array<double, 4> axis{};
            for (int i = 0; i < 2; ++i) {
                tp = theta;
                tm = theta;
                tp[static_cast<std::size_t>(i)] += h;
                tm[static_cast<std::size_t>(i)] -= h;
                const double fp = phi(tp), fm = phi(tm);
                axis[static_cast<std::size_t>(2 * i)] = fp;
                axis[static_cast<std::size_t>(2 * i + 1)] = fm;
                gvec[static_cast<std::size_t>(i)] = (fp - fm) / (2.0 * h);
            }
            hess[0] = (axis[0] - 2.0 * phi0 + axis[1]) / (h * h);
            hess[2] = (axis[2] - 2.0 * phi0 + axis[3]) / (h * h);
            {
                std::array<double, 2> tpp = theta, tpm = theta, tmp = theta, tmm = theta;
                tpp[0] += h;
                tpp[1] += h;
                tpm[0] += h;
                tpm[1] -= h;
                tmp[0] -= h;
                tmp[1] += h;
                tmm[0] -= h;
                tmm[1] -= h;
                hess[1] = (phi(tpp) - phi(tpm) - phi(tmp) + phi(tmm)) / (4.0 * h * h);
            }
            grad_norm = std::hypot(gvec[0], gvec[1]);
            trace.iterates.push_back({static_cast<int>(phase), ph.k,
                                      Hyperparams{std::exp(theta[0]), std::exp(theta[1])}, phi0, grad_norm});
            if (grad_norm < grad_tol) {
                if (final_phase) termination = "converged";
                break;
            }

            std::array<double, 2> step = floored_newton_step(hess, gvec);
            const double step_norm = std::hypot(step[0], step[1]);
            if (step_norm > 10.0) {  // a floored Hessian can propose absurd steps
                step[0] *= 10.0 / step_norm;
                step[1] *= 10.0 / step_norm;
            }
            const double slope = gvec[0] * step[0] + gvec[1] * step[1];

            // Armijo backtracking, factor 0.5, c = 1e-4. A candidate where
            // the estimator itself fails (e.g. CG budget at an absurd
            // condition number) reads as +inf and is backtracked over.
            double t = 1.0;
            bool accepted = false;
            double improvement = 0.0;
            for (int halving = 0; halving < 40; ++halving) {
                const std::array<double, 2> cand = {theta[0] + t * step[0], theta[1] + t * step[1]};
                double phi_cand;
                try {
                    phi_cand = phi(cand);
                } catch (const std::exception&) {
                    phi_cand = std::numeric_limits<double>::infinity();
                }
                if (phi_cand <= phi0 + 1e-4 * t * slope) {
                    improvement = phi0 - phi_cand;
                    theta = cand;
                    phi0 = phi_cand;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            ++iters_used;
            if (!accepted) {
                // Descent stalled at this estimator's noise floor; hand over
                // to the next (finer) phase.
                if (final_phase) termination = "line_search_stalled";
                break;
            }
            if (probing && improvement <= opts.phi_stall_tol) {
                if (final_phase) termination = "stalled";
                break;
            }
            if (it + 1 == ph.max_iters && final_phase) termination = "budget_exhausted";
        }
        trace.phases.push_back({ph.k, Hyperparams{std::exp(theta[0]), std::exp(theta[1])}, phi0, grad_norm,
                                iters_used});
    }

    trace.termination = termination;
    result.estimate = Hyperparams{std::exp(theta[0]), std::exp(theta[1])};
    return result;
}

}  // namespace gmrf
