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

#include <cstdint>
#include <optional>
#include <string>

#include "gmrf/krylov.hpp"
#include "gmrf/probing.hpp"
#include "gmrf/quadrature.hpp"
#include "gmrf/sparse.hpp"

namespace gmrf {

/// Thrown when dense Cholesky factorization breaks down (matrix not SPD).
class NotSpdError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class LogDetMethod { ExactDense, Probing, Hutchinson };

struct ConfidenceInterval {
    double level = 0.95;
    double normal_halfwidth = 0.0;     // z * sample sd / sqrt(s)
    double hoeffding_halfwidth = 0.0;  // from the spectral log-range envelope
};

struct SolverStats {
    std::int64_t total_seed_iterations = 0;
    std::int64_t total_matvecs = 0;
    double max_imag_residue = 0.0;
};

struct LogDetEstimate {
    double value = 0.0;
    LogDetMethod method = LogDetMethod::ExactDense;
    int k = 0;                              // probing distance, when applicable
    std::int64_t num_vectors = 1;           // color count or sample count
    SolverStats stats;
    std::optional<ConfidenceInterval> confidence;  // Hutchinson only

    std::string method_name() const;
};

/// Exact log-determinant through an unpivoted dense Cholesky factorization:
/// log det Q = sum_j 2 log l_jj. Desk-scale oracle path; refuses n beyond
/// `dense_cap` and throws NotSpdError if a pivot fails.
double logdet_exact_dense(const CsrMatrix& q, index_t dense_cap = 4096);

/// Probing estimator: sum over color classes of v_c^T log(Q) v_c, each
/// log-apply through the quadrature rule and one multi-shift solve. The sum
/// carries no 1/s factor; indicator-mode probing vectors partition the
/// coordinates. Work is distributed one probing vector per worker and
/// reduced in color order, so the value is independent of thread count.
LogDetEstimate logdet_probing(const CsrMatrix& q, const Coloring& c, const QuadratureRule& rule,
                              const SolverConfig& cfg, ProbingMode mode = ProbingMode::Signed,
                              std::uint64_t seed = 0, int threads = 1);

/// Hutchinson estimator: mean of s quadratic forms v^T log(Q) v over dense
/// Rademacher vectors. Confidence reports both the normal-approximation
/// half-width and a Hoeffding-style bound using n*(log lmax - log lmin) as
/// the sample range envelope.
LogDetEstimate logdet_hutchinson(const CsrMatrix& q, std::int64_t s, const QuadratureRule& rule,
                                 const SolverConfig& cfg, std::uint64_t seed = 0, double level = 0.95,
                                 int threads = 1);

}  // namespace gmrf
