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

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gmrf/krylov.hpp"
#include "gmrf/logdet.hpp"
#include "gmrf/probing.hpp"
#include "gmrf/spde.hpp"

namespace gmrf {

using LogDetFn = std::function<double(const CsrMatrix&)>;

/// Negative log density of the zero-mean GMRF x ~ N(0, Q(h)^{-1}):
///   -1/2 logdet(Q) + 1/2 x^T Q x + (n/2) log(2 pi).
/// The log-determinant evaluator is injected (exact, probing, Hutchinson).
double gmrf_neg_loglik(std::span<const double> x, const Hyperparams& h, const GridSpec& g,
                       const LogDetFn& logdet_fn);

/// Gauss-linear observation model y = A x + noise, with Gaussian prior
/// x ~ N(mu, Q_x(eta)^{-1}) and noise precision Q_1. The forward operator is
/// the identity when `forward` is empty (the direct-observation case).
struct GaussLinearModel {
    std::optional<CsrMatrix> forward;
    std::variant<double, CsrMatrix> noise_precision = 1.0;  // q*I or a sparse matrix
    std::vector<double> prior_mean;                         // empty = zero
    std::function<CsrMatrix(std::span<const double>)> prior_precision;
    std::function<double(std::span<const double>)> log_prior_eta;    // default: flat
    std::function<double(std::span<const double>)> log_prior_theta;  // default: flat
};

/// Hyperparameter objective, up to an additive constant:
///   1/2 (y-Ax)^T Q_1 (y-Ax) - 1/2 logdet Q_1
/// + 1/2 (x-mu)^T Q_x (x-mu) - 1/2 logdet Q_x - log p(eta) - log p(theta).
double gauss_linear_objective(const GaussLinearModel& m, std::span<const double> x,
                              std::span<const double> y, std::span<const double> eta,
                              std::span<const double> theta, const LogDetFn& logdet_fn);

struct Posterior {
    CsrMatrix precision;
    std::vector<double> mean;
};

/// Posterior of x given y: precision Q_p = Q_x + A^T Q_1 A, mean solving
/// Q_p mu_p = Q_x mu + A^T Q_1 y by CG.
Posterior posterior_mode(const GaussLinearModel& m, std::span<const double> y,
                         std::span<const double> eta, std::span<const double> theta,
                         const SolverConfig& cfg);

/// One leg of the coloring-escalation schedule: optimize with distance-k
/// probing for at most max_iters Newton steps, then move to the next k.
struct SchedulePhase {
    int k = 2;
    int max_iters = 20;
};

/// Parses "2:20,4:10,6:10".
std::vector<SchedulePhase> parse_schedule(const std::string& text);

struct FitOptions {
    SolverConfig solver;
    LogDetMethod method = LogDetMethod::Probing;
    ProbingMode probing_mode = ProbingMode::Indicator;
    std::uint64_t seed = 0;
    double fd_step = 1e-4;         // central-difference step in (log kappa, log tau)
    double phase_grad_tol = 1e-2;  // gradient norm triggering escalation
    double final_grad_tol = 1e-5;  // convergence in the last phase
    // Probing objectives carry solver-tolerance noise that keeps the
    // finite-difference gradient from ever reaching the exact-path
    // tolerances; a phase ends once an accepted step improves Phi by less
    // than this (probing method only).
    double phi_stall_tol = 1e-6;
    int threads = 1;
    int quad_order = 0;         // 0 = order from the predicted-error rule
    index_t dense_cap = 4096;   // for method ExactDense
    LogDetFn custom_logdet;     // overrides method when set (test oracles)
    // Hyperparameter-aware exact oracle (e.g. closed-form grid eigenvalues);
    // takes precedence over custom_logdet.
    std::function<double(const GridSpec&, const Hyperparams&)> custom_grid_logdet;
};

struct TraceEntry {
    int phase_index = 0;
    int k = 0;
    Hyperparams hp{1.0, 1.0};
    double phi = 0.0;
    double grad_norm = 0.0;
};

struct PhaseSummary {
    int k = 0;
    Hyperparams estimate{1.0, 1.0};
    double phi = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
};

struct OptimizerTrace {
    std::vector<TraceEntry> iterates;   // accepted Newton iterates, Phi nonincreasing
    std::vector<PhaseSummary> phases;   // the temporary k-distance estimates
    std::string termination;
};

struct FitResult {
    Hyperparams estimate{1.0, 1.0};
    OptimizerTrace trace;
};

/// Modified-Newton fit of (kappa, tau) to a directly observed field x_obs,
/// optimizing in (log kappa, log tau) with central finite differences, an
/// eigenvalue-floored Hessian and Armijo backtracking. Early phases use
/// coarse (small k) probing log-determinants, later phases escalate k;
/// probing seeds are frozen within a phase and refreshed on escalation so
/// the objective stays deterministic under differencing.
FitResult fit_hyperparams(std::span<const double> x_obs, const GridSpec& g, const Hyperparams& init,
                          std::span<const SchedulePhase> schedule, const FitOptions& opts);

}  // namespace gmrf
