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

#include "gmrf/logdet.hpp"

#include <algorithm>
#include <cmath>

#include "gmrf/parallel.hpp"
#include "gmrf/rng.hpp"

namespace gmrf {

namespace {

// Inverse standard normal CDF (Acklam's rational approximation, ~1e-9
// absolute), enough for confidence half-widths.
double inverse_normal_cdf(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                               1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                               6.680131188771972e+01,  -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                               -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                               3.754408661907416e+00};
    const double plow = 0.02425;
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("inverse_normal_cdf: p in (0,1) required");
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) return -inverse_normal_cdf(1.0 - p);
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

std::string LogDetEstimate::method_name() const {
    switch (method) {
        case LogDetMethod::ExactDense:
            return "exact-dense";
        case LogDetMethod::Probing:
            return "probing(" + std::to_string(k) + ")";
        case LogDetMethod::Hutchinson:
            return "hutchinson(" + std::to_string(num_vectors) + ")";
    }
    return "unknown";
}

double logdet_exact_dense(const CsrMatrix& q, index_t dense_cap) {
    const index_t n = q.rows();
    if (n > dense_cap) {
        throw std::invalid_argument("logdet_exact_dense: n=" + std::to_string(n) + " exceeds dense cap " +
                                    std::to_string(dense_cap));
    }
    const std::size_t un = static_cast<std::size_t>(n);
    std::vector<double> a(un * un, 0.0);
    for (index_t i = 0; i < n; ++i) {
        const auto cols = q.row_cols(i);
        const auto vals = q.row_values(i);
        for (std::size_t t = 0; t < cols.size(); ++t) a[un * static_cast<std::size_t>(i) + static_cast<std::size_t>(cols[t])] = vals[t];
    }

    // In-place lower Cholesky; only the lower triangle is referenced.
    double logdet = 0.0;
    for (std::size_t j = 0; j < un; ++j) {
        double diag = a[un * j + j];
        for (std::size_t t = 0; t < j; ++t) diag -= a[un * j + t] * a[un * j + t];
        if (!(diag > 0.0)) throw NotSpdError("logdet_exact_dense: factorization breakdown at pivot " + std::to_string(j));
        const double ljj = std::sqrt(diag);
        a[un * j + j] = ljj;
        logdet += 2.0 * std::log(ljj);
        const double inv = 1.0 / ljj;
        for (std::size_t i = j + 1; i < un; ++i) {
            double s = a[un * i + j];
            const double* ri = &a[un * i];
            const double* rj = &a[un * j];
            for (std::size_t t = 0; t < j; ++t) s -= ri[t] * rj[t];
            a[un * i + j] = s * inv;
        }
    }
    return logdet;
}

LogDetEstimate logdet_probing(const CsrMatrix& q, const Coloring& c, const QuadratureRule& rule,
                              const SolverConfig& cfg, ProbingMode mode, std::uint64_t seed, int threads) {
    if (c.num_nodes() != q.rows()) throw std::invalid_argument("logdet_probing: coloring size mismatch");
    const std::vector<ProbingVector> vectors = probing_vectors(c, mode, seed);
    const int s = static_cast<int>(vectors.size());

    std::vector<double> terms(static_cast<std::size_t>(s), 0.0);
    std::vector<std::int64_t> iters(static_cast<std::size_t>(s), 0), mvs(static_cast<std::size_t>(s), 0);
    std::vector<double> imag(static_cast<std::size_t>(s), 0.0);

    parallel_for_index(s, threads, [&](int idx) {
        std::vector<double> v(static_cast<std::size_t>(q.rows()));
        vectors[static_cast<std::size_t>(idx)].fill_dense(c, v);
        const ApplyLogResult r = apply_log(q, v, rule, cfg);
        double quad_form = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) quad_form += v[i] * r.value[i];
        terms[static_cast<std::size_t>(idx)] = quad_form;
        iters[static_cast<std::size_t>(idx)] = r.seed_iterations;
        mvs[static_cast<std::size_t>(idx)] = r.matvec_count;
        imag[static_cast<std::size_t>(idx)] = r.imag_residue_rel;
    });

    LogDetEstimate est;
    est.method = LogDetMethod::Probing;
    est.k = c.k;
    est.num_vectors = s;
    double value = 0.0;  // fixed reduction order: by color index
    for (int i = 0; i < s; ++i) value += terms[static_cast<std::size_t>(i)];
    est.value = value;
    for (int i = 0; i < s; ++i) {
        est.stats.total_seed_iterations += iters[static_cast<std::size_t>(i)];
        est.stats.total_matvecs += mvs[static_cast<std::size_t>(i)];
        est.stats.max_imag_residue = std::max(est.stats.max_imag_residue, imag[static_cast<std::size_t>(i)]);
    }
    return est;
}

LogDetEstimate logdet_hutchinson(const CsrMatrix& q, std::int64_t s, const QuadratureRule& rule,
                                 const SolverConfig& cfg, std::uint64_t seed, double level, int threads) {
    if (s < 1) throw std::invalid_argument("logdet_hutchinson: s must be >= 1");
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("logdet_hutchinson: level in (0,1) required");
    const index_t n = q.rows();

    std::vector<double> samples(static_cast<std::size_t>(s), 0.0);
    std::vector<std::int64_t> iters(static_cast<std::size_t>(s), 0), mvs(static_cast<std::size_t>(s), 0);
    std::vector<double> imag(static_cast<std::size_t>(s), 0.0);

    parallel_for_index(static_cast<int>(s), threads, [&](int j) {
        std::vector<double> v(static_cast<std::size_t>(n));
        for (index_t i = 0; i < n; ++i) {
            v[static_cast<std::size_t>(i)] = rademacher(seed, static_cast<std::uint64_t>(j) + 0x100, static_cast<std::uint64_t>(i));
        }
        const ApplyLogResult r = apply_log(q, v, rule, cfg);
        double quad_form = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) quad_form += v[i] * r.value[i];
        samples[static_cast<std::size_t>(j)] = quad_form;
        iters[static_cast<std::size_t>(j)] = r.seed_iterations;
        mvs[static_cast<std::size_t>(j)] = r.matvec_count;
        imag[static_cast<std::size_t>(j)] = r.imag_residue_rel;
    });

    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= static_cast<double>(s);
    double var = 0.0;
    for (double x : samples) var += (x - mean) * (x - mean);
    var = (s > 1) ? var / static_cast<double>(s - 1) : 0.0;

    LogDetEstimate est;
    est.method = LogDetMethod::Hutchinson;
    est.num_vectors = s;
    est.value = mean;
    for (std::int64_t j = 0; j < s; ++j) {
        est.stats.total_seed_iterations += iters[static_cast<std::size_t>(j)];
        est.stats.total_matvecs += mvs[static_cast<std::size_t>(j)];
        est.stats.max_imag_residue = std::max(est.stats.max_imag_residue, imag[static_cast<std::size_t>(j)]);
    }

    ConfidenceInterval ci;
    ci.level = level;
    const double z = inverse_normal_cdf(0.5 + 0.5 * level);
    ci.normal_halfwidth = z * std::sqrt(var / static_cast<double>(s));
    // Each sample lies in n * [log lmin, log lmax]; Hoeffding for the mean of
    // s bounded iid variables.
    const double range = static_cast<double>(n) *
                         (std::log(rule.bounds.lambda_max) - std::log(rule.bounds.lambda_min));
    ci.hoeffding_halfwidth = range * std::sqrt(std::log(2.0 / (1.0 - level)) / (2.0 * static_cast<double>(s)));
    est.confidence = ci;
    return est;
}

}  // namespace gmrf
