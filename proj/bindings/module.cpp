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

#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gmrf/likelihood.hpp"
#include "gmrf/logdet.hpp"
#include "gmrf/matrix_market.hpp"
#include "gmrf/probing.hpp"
#include "gmrf/quadrature.hpp"
#include "gmrf/spde.hpp"

namespace py = pybind11;
using namespace gmrf;

namespace {

std::vector<double> to_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 1) throw std::invalid_argument("expected a 1-d array");
    return std::vector<double>(a.data(), a.data() + a.shape(0));
}

py::array_t<double> to_array(const std::vector<double>& v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

Boundary boundary_from_string(const std::string& s) {
    if (s == "neumann") return Boundary::Neumann;
    if (s == "dirichlet") return Boundary::Dirichlet;
    throw std::invalid_argument("boundary must be 'neumann' or 'dirichlet'");
}

ProbingMode mode_from_string(const std::string& s) {
    if (s == "signed") return ProbingMode::Signed;
    if (s == "indicator") return ProbingMode::Indicator;
    throw std::invalid_argument("mode must be 'signed' or 'indicator'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "matrix-free log-determinants for sparse SPD precision matrices";

    py::class_<CsrMatrix>(m, "CsrMatrix")
        .def_static(
            "from_coo",
            [](index_t n, const std::vector<index_t>& rows, const std::vector<index_t>& cols,
               const std::vector<double>& vals) {
                if (rows.size() != cols.size() || rows.size() != vals.size()) {
                    throw std::invalid_argument("rows/cols/vals must have equal length");
                }
                std::vector<Triplet> ts(rows.size());
                for (std::size_t i = 0; i < rows.size(); ++i) ts[i] = {rows[i], cols[i], vals[i]};
                return CsrMatrix::from_triplets(n, std::move(ts));
            },
            py::arg("n"), py::arg("rows"), py::arg("cols"), py::arg("vals"))
        .def_property_readonly("n", &CsrMatrix::rows)
        .def_property_readonly("nnz", &CsrMatrix::nnz)
        .def_property_readonly("row_offsets", [](const CsrMatrix& a) { return a.row_offsets(); })
        .def_property_readonly("col_indices", [](const CsrMatrix& a) { return a.col_indices(); })
        .def_property_readonly("values", [](const CsrMatrix& a) { return to_array(a.values()); })
        .def("matvec", [](const CsrMatrix& a, const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
            return to_array(a.matvec(to_vector(x)));
        });

    m.def("read_matrix_market", &read_matrix_market_file, py::arg("path"));
    m.def("write_matrix_market", &write_matrix_market_file, py::arg("path"), py::arg("matrix"));

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init([](const std::vector<index_t>& extents, const std::string& boundary) {
                 GridSpec g{extents, boundary_from_string(boundary)};
                 g.validate();
                 return g;
             }),
             py::arg("extents"), py::arg("boundary") = "neumann")
        .def_property_readonly("size", &GridSpec::size)
        .def_readonly("extents", &GridSpec::extents);

    py::class_<Hyperparams>(m, "Hyperparams")
        .def(py::init([](double kappa, double tau) {
                 Hyperparams h{kappa, tau};
                 h.validate();
                 return h;
             }),
             py::arg("kappa"), py::arg("tau"))
        .def_readonly("kappa", &Hyperparams::kappa)
        .def_readonly("tau", &Hyperparams::tau)
        .def("__repr__", [](const Hyperparams& h) {
            return "Hyperparams(kappa=" + std::to_string(h.kappa) + ", tau=" + std::to_string(h.tau) + ")";
        });

    m.def("build_precision", &build_precision, py::arg("grid"), py::arg("hyperparams"));
    m.def("build_laplacian", &build_laplacian, py::arg("grid"));
    m.def("precision_dlogdet_dtau", &precision_dlogdet_dtau, py::arg("grid"), py::arg("hyperparams"));

    py::class_<AdjacencyGraph>(m, "AdjacencyGraph").def(py::init<const CsrMatrix&>(), py::arg("matrix"));
    m.def("graph_distance_ball", &graph_distance_ball, py::arg("graph"), py::arg("node"), py::arg("k"));

    py::class_<Coloring>(m, "Coloring")
        .def_readonly("k", &Coloring::k)
        .def_readonly("num_colors", &Coloring::num_colors)
        .def_readonly("color_of", &Coloring::color_of);
    m.def(
        "color_distance_k",
        [](const CsrMatrix& q, int k) { return color_distance_k(AdjacencyGraph(q), k); },
        py::arg("matrix"), py::arg("k"));

    py::class_<SpectralBounds>(m, "SpectralBounds")
        .def(py::init([](double lo, double hi) {
                 SpectralBounds b{lo, hi};
                 b.validate();
                 return b;
             }),
             py::arg("lambda_min"), py::arg("lambda_max"))
        .def_readonly("lambda_min", &SpectralBounds::lambda_min)
        .def_readonly("lambda_max", &SpectralBounds::lambda_max);
    m.def(
        "estimate_spectral_bounds",
        [](const CsrMatrix& q, int iters, double margin) { return estimate_spectral_bounds(q, iters, margin); },
        py::arg("matrix"), py::arg("iters") = 100, py::arg("margin") = 0.05);
    m.def("exact_grid_bounds", &exact_grid_bounds, py::arg("grid"), py::arg("hyperparams"));

    py::class_<QuadratureRule>(m, "QuadratureRule")
        .def_readonly("order", &QuadratureRule::order)
        .def_readonly("weights", &QuadratureRule::weights)
        .def_readonly("shifts", &QuadratureRule::shifts)
        .def_readonly("bounds", &QuadratureRule::bounds);
    m.def("build_log_quadrature", &build_log_quadrature, py::arg("bounds"), py::arg("n_points"));
    m.def("scalar_apply", &scalar_apply, py::arg("rule"), py::arg("lam"));
    m.def("predicted_scalar_error", &predicted_scalar_error, py::arg("bounds"), py::arg("n_points"));
    m.def("choose_quadrature_order", &choose_quadrature_order, py::arg("bounds"), py::arg("rel_tol"),
          py::arg("safety") = 0.1, py::arg("cap") = 40);

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init([](double rel_tol, int max_iter) {
                 SolverConfig cfg{rel_tol, max_iter};
                 cfg.validate();
                 return cfg;
             }),
             py::arg("rel_tol") = 1e-3, py::arg("max_iter") = 10000)
        .def_readonly("rel_tol", &SolverConfig::rel_tol)
        .def_readonly("max_iter", &SolverConfig::max_iter);

    m.def(
        "cg_solve",
        [](const CsrMatrix& q, const py::array_t<double, py::array::c_style | py::array::forcecast>& b,
           const SolverConfig& cfg) {
            const CgResult r = cg_solve(q, to_vector(b), cfg);
            return py::make_tuple(to_array(r.x), r.iterations, r.residual_norm);
        },
        py::arg("matrix"), py::arg("b"), py::arg("config") = SolverConfig{});

    m.def(
        "cocg_m_solve",
        [](const CsrMatrix& q, const py::array_t<double, py::array::c_style | py::array::forcecast>& b,
           const std::vector<std::complex<double>>& shifts, const SolverConfig& cfg) {
            const ShiftedSolveResult r = cocg_m_solve(q, to_vector(b), shifts, cfg);
            py::array_t<std::complex<double>> sol({static_cast<py::ssize_t>(shifts.size()),
                                                   static_cast<py::ssize_t>(q.rows())});
            auto view = sol.mutable_unchecked<2>();
            for (std::size_t l = 0; l < shifts.size(); ++l) {
                for (index_t i = 0; i < q.rows(); ++i) view(static_cast<py::ssize_t>(l), static_cast<py::ssize_t>(i)) = r.solutions[l][static_cast<std::size_t>(i)];
            }
            py::dict info;
            info["seed_iterations"] = r.seed_iterations;
            info["matvec_count"] = r.matvec_count;
            info["residual_norms"] = r.residual_norms;
            info["converged"] = std::vector<bool>(r.converged.begin(), r.converged.end());
            return py::make_tuple(sol, info);
        },
        py::arg("matrix"), py::arg("b"), py::arg("shifts"), py::arg("config") = SolverConfig{});

    m.def(
        "apply_log",
        [](const CsrMatrix& q, const py::array_t<double, py::array::c_style | py::array::forcecast>& v,
           const QuadratureRule& rule, const SolverConfig& cfg) {
            const ApplyLogResult r = apply_log(q, to_vector(v), rule, cfg);
            py::dict info;
            info["imag_residue_rel"] = r.imag_residue_rel;
            info["seed_iterations"] = r.seed_iterations;
            info["matvec_count"] = r.matvec_count;
            return py::make_tuple(to_array(r.value), info);
        },
        py::arg("matrix"), py::arg("v"), py::arg("rule"), py::arg("config") = SolverConfig{});

    py::class_<ConfidenceInterval>(m, "ConfidenceInterval")
        .def_readonly("level", &ConfidenceInterval::level)
        .def_readonly("normal_halfwidth", &ConfidenceInterval::normal_halfwidth)
        .def_readonly("hoeffding_halfwidth", &ConfidenceInterval::hoeffding_halfwidth);

    py::class_<SolverStats>(m, "SolverStats")
        .def_readonly("total_seed_iterations", &SolverStats::total_seed_iterations)
        .def_readonly("total_matvecs", &SolverStats::total_matvecs)
        .def_readonly("max_imag_residue", &SolverStats::max_imag_residue);

    py::class_<LogDetEstimate>(m, "LogDetEstimate")
        .def_readonly("value", &LogDetEstimate::value)
        .def_readonly("k", &LogDetEstimate::k)
        .def_readonly("num_vectors", &LogDetEstimate::num_vectors)
        .def_readonly("stats", &LogDetEstimate::stats)
        .def_readonly("confidence", &LogDetEstimate::confidence)
        .def_property_readonly("method", &LogDetEstimate::method_name);

    m.def("logdet_exact_dense", &logdet_exact_dense, py::arg("matrix"), py::arg("dense_cap") = 4096);
    m.def(
        "logdet_probing",
        [](const CsrMatrix& q, int k, const QuadratureRule& rule, const SolverConfig& cfg,
           const std::string& mode, std::uint64_t seed, int threads) {
            const Coloring c = color_distance_k(AdjacencyGraph(q), k);
            return logdet_probing(q, c, rule, cfg, mode_from_string(mode), seed, threads);
        },
        py::arg("matrix"), py::arg("k"), py::arg("rule"), py::arg("config") = SolverConfig{},
        py::arg("mode") = "signed", py::arg("seed") = 0, py::arg("threads") = 1);
    m.def("logdet_hutchinson", &logdet_hutchinson, py::arg("matrix"), py::arg("s"), py::arg("rule"),
          py::arg("config") = SolverConfig{}, py::arg("seed") = 0, py::arg("level") = 0.95,
          py::arg("threads") = 1);

    m.def(
        "estimate_probing_distance",
        [](const CsrMatrix& q, double eps, const std::vector<index_t>& samples,
           const std::function<std::vector<double>(index_t)>& op) {
            return estimate_probing_distance(q, eps, samples, op);
        },
        py::arg("matrix"), py::arg("eps"), py::arg("sample_nodes"), py::arg("apply_log_basis"));
    m.def("default_probe_nodes", &default_probe_nodes, py::arg("n"), py::arg("seed") = 0);

    m.def(
        "gmrf_neg_loglik",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x, const Hyperparams& h,
           const GridSpec& g, const LogDetFn& fn) { return gmrf_neg_loglik(to_vector(x), h, g, fn); },
        py::arg("x"), py::arg("hyperparams"), py::arg("grid"), py::arg("logdet_fn"));

    py::class_<SchedulePhase>(m, "SchedulePhase")
        .def(py::init([](int k, int iters) { return SchedulePhase{k, iters}; }), py::arg("k"),
             py::arg("max_iters"))
        .def_readonly("k", &SchedulePhase::k)
        .def_readonly("max_iters", &SchedulePhase::max_iters);
    m.def("parse_schedule", &parse_schedule, py::arg("text"));

    py::class_<PhaseSummary>(m, "PhaseSummary")
        .def_readonly("k", &PhaseSummary::k)
        .def_readonly("estimate", &PhaseSummary::estimate)
        .def_readonly("phi", &PhaseSummary::phi)
        .def_readonly("grad_norm", &PhaseSummary::grad_norm)
        .def_readonly("iterations", &PhaseSummary::iterations);

    py::class_<TraceEntry>(m, "TraceEntry")
        .def_readonly("phase_index", &TraceEntry::phase_index)
        .def_readonly("k", &TraceEntry::k)
        .def_readonly("hp", &TraceEntry::hp)
        .def_readonly("phi", &TraceEntry::phi)
        .def_readonly("grad_norm", &TraceEntry::grad_norm);

    py::class_<OptimizerTrace>(m, "OptimizerTrace")
        .def_readonly("iterates", &OptimizerTrace::iterates)
        .def_readonly("phases", &OptimizerTrace::phases)
        .def_readonly("termination", &OptimizerTrace::termination);

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("estimate", &FitResult::estimate)
        .def_readonly("trace", &FitResult::trace);

    m.def(
        "fit_hyperparams",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x_obs, const GridSpec& g,
           const Hyperparams& init, const std::string& schedule, const std::string& method,
           const std::string& mode, double rel_tol, std::uint64_t seed, int threads) {
            FitOptions opts;
            opts.solver.rel_tol = rel_tol;
            opts.method = method == "exact" ? LogDetMethod::ExactDense : LogDetMethod::Probing;
            opts.probing_mode = mode_from_string(mode);
            opts.seed = seed;
            opts.threads = threads;
            const auto phases = parse_schedule(schedule);
            return fit_hyperparams(to_vector(x_obs), g, init, phases, opts);
        },
        py::arg("x_obs"), py::arg("grid"), py::arg("init"), py::arg("schedule") = "2:20,4:10,6:10",
        py::arg("method") = "probing", py::arg("mode") = "indicator", py::arg("rel_tol") = 1e-3,
        py::arg("seed") = 0, py::arg("threads") = 1);

    py::register_exception<ConvergenceError>(m, "ConvergenceError");
    py::register_exception<NotSpdError>(m, "NotSpdError");
}
