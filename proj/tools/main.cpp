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

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gmrf/likelihood.hpp"
#include "gmrf/logdet.hpp"
#include "gmrf/matrix_market.hpp"
#include "gmrf/parallel.hpp"
#include "gmrf/probing.hpp"
#include "gmrf/quadrature.hpp"
#include "gmrf/spde.hpp"

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Shared flags describing where the matrix comes from: exactly one of a
// Matrix Market file or a grid spec.
struct MatrixSource {
    std::string matrix_file;
    std::string grid;
    double kappa = 1.0;
    double tau = 1.0;
    std::string boundary = "neumann";

    void add_flags(CLI::App* cmd) {
        cmd->add_option("--matrix", matrix_file, "Matrix Market file (coordinate real symmetric)");
        cmd->add_option("--grid", grid, "grid spec such as 64x64 or 32x32x8");
        cmd->add_option("--kappa", kappa, "range parameter (grid source)");
        cmd->add_option("--tau", tau, "precision scale (grid source)");
        cmd->add_option("--boundary", boundary, "neumann|dirichlet (grid source)")
            ->check(CLI::IsMember({"neumann", "dirichlet"}));
    }

    bool from_grid() const { return !grid.empty(); }

    gmrf::GridSpec grid_spec() const {
        return gmrf::parse_grid_spec(grid, boundary == "neumann" ? gmrf::Boundary::Neumann
                                                                 : gmrf::Boundary::Dirichlet);
    }

    gmrf::CsrMatrix load() const {
        if (from_grid()) return gmrf::build_precision(grid_spec(), {kappa, tau});
        return gmrf::read_matrix_market_file(matrix_file);
    }

    /// Spectral bounds: exact endpoints for grid precisions, Lanczos with
    /// margins for matrices from files.
    gmrf::SpectralBounds bounds(const gmrf::CsrMatrix& q) const {
        if (from_grid()) return gmrf::exact_grid_bounds(grid_spec(), {kappa, tau});
        return gmrf::estimate_spectral_bounds(q);
    }
};

int default_threads() {
    if (const char* env = std::getenv("GMRF_NUM_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return gmrf::resolve_thread_count(0);
}

std::vector<double> read_data_file(const std::string& path, gmrf::index_t expected) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open data file: " + path);
    std::vector<double> data;
    double v = 0.0;
    while (in >> v) data.push_back(v);
    if (static_cast<gmrf::index_t>(data.size()) != expected) {
        throw std::runtime_error("data file holds " + std::to_string(data.size()) + " values, expected " +
                                 std::to_string(expected));
    }
    return data;
}

json complex_pair(const std::complex<double>& z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"matrix-free log-determinants and GMRF likelihood fits"};
    app.require_subcommand(1);

    MatrixSource source;
    std::uint64_t seed = 0;
    int threads = default_threads();
    double tol = 1e-3;

    // --- build ---
    auto* build = app.add_subcommand("build", "materialize a grid precision matrix as Matrix Market");
    std::string build_out;
    source.add_flags(build);
    build->add_option("--out", build_out, "output .mtx path")->required();

    // --- color ---
    auto* color = app.add_subcommand("color", "distance-k greedy coloring");
    int color_k = 1;
    std::string color_out;
    source.add_flags(color);
    color->add_option("--k", color_k, "coloring distance")->required();
    color->add_option("--out", color_out, "write color map (one integer per line)");

    // --- quadrature-table ---
    auto* quad = app.add_subcommand("quadrature-table", "print log-quadrature weights and shifts");
    double lmin = 1.0, lmax = 10.0;
    int quad_n = 16;
    quad->add_option("--lmin", lmin, "lower spectral bound")->required();
    quad->add_option("--lmax", lmax, "upper spectral bound")->required();
    quad->add_option("--N", quad_n, "number of quadrature points")->required();

    // --- logdet ---
    auto* logdet = app.add_subcommand("logdet", "log-determinant estimation");
    std::string method = "probing";
    int probe_k = 4;
    std::int64_t hutch_s = 64;
    int logdet_n = 0;
    double level = 0.95;
    std::string mode = "signed";
    source.add_flags(logdet);
    logdet->add_option("--method", method, "exact|probing|hutchinson")
        ->check(CLI::IsMember({"exact", "probing", "hutchinson"}));
    logdet->add_option("--k", probe_k, "probing distance");
    logdet->add_option("--s", hutch_s, "Hutchinson sample count");
    logdet->add_option("--tol", tol, "solver relative tolerance");
    logdet->add_option("--seed", seed, "random seed (recorded in output)");
    logdet->add_option("--N", logdet_n, "quadrature order (0 = automatic)");
    logdet->add_option("--threads", threads, "worker threads (env GMRF_NUM_THREADS)");
    logdet->add_option("--level", level, "confidence level (hutchinson)");
    logdet->add_option("--mode", mode, "probing vector mode: signed|indicator")
        ->check(CLI::IsMember({"signed", "indicator"}));

    // --- fit ---
    auto* fit = app.add_subcommand("fit", "hyperparameter fit on a directly observed field");
    std::string data_path;
    double init_kappa = 1.0, init_tau = 1.0;
    std::string schedule_text = "2:20,4:10,6:10";
    std::string fit_method = "probing";
    std::string fit_mode = "indicator";
    int fit_n = 0;
    source.add_flags(fit);
    fit->add_option("--data", data_path, "whitespace-delimited field values, row-major")->required();
    fit->add_option("--init-kappa", init_kappa, "initial kappa");
    fit->add_option("--init-tau", init_tau, "initial tau");
    fit->add_option("--schedule", schedule_text, "coloring escalation, e.g. 2:20,4:10,6:10");
    fit->add_option("--method", fit_method, "probing|exact")->check(CLI::IsMember({"probing", "exact"}));
    fit->add_option("--probing-mode", fit_mode, "indicator|signed")
        ->check(CLI::IsMember({"indicator", "signed"}));
    fit->add_option("--tol", tol, "solver relative tolerance");
    fit->add_option("--seed", seed, "random seed");
    fit->add_option("--threads", threads, "worker threads");
    fit->add_option("--N", fit_n, "quadrature order (0 = per-phase automatic)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // flag errors -> exit 2, --help -> 0
    }

    // Source requirements are flag validation, not runtime failures.
    const bool needs_source = *build || *color || *logdet || *fit;
    if (needs_source && (source.from_grid() == !source.matrix_file.empty())) {
        std::cerr << "exactly one of --matrix or --grid is required\n" << app.help() << std::endl;
        return 2;
    }
    if ((*build || *fit) && !source.from_grid()) {
        std::cerr << "this subcommand requires --grid\n" << app.help() << std::endl;
        return 2;
    }

    const auto start = Clock::now();
    json out;
    try {
        if (*build) {
            const gmrf::CsrMatrix q = source.load();
            gmrf::write_matrix_market_file(build_out, q);
            out["n"] = q.rows();
            out["nnz"] = q.nnz();
            out["kappa"] = source.kappa;
            out["tau"] = source.tau;
            out["out"] = build_out;
        } else if (*color) {
            // For a grid source this colors the grid (stencil) graph itself;
            // for a matrix file, the graph of that matrix.
            std::optional<gmrf::CsrMatrix> m;
            if (source.from_grid()) {
                m = gmrf::build_laplacian(source.grid_spec());
            } else {
                m = source.load();
            }
            const gmrf::AdjacencyGraph graph(*m);
            const gmrf::Coloring coloring = gmrf::color_distance_k(graph, color_k);
            if (!color_out.empty()) {
                std::ofstream cf(color_out);
                if (!cf) throw std::runtime_error("cannot open " + color_out);
                for (auto c : coloring.color_of) cf << c << '\n';
                out["out"] = color_out;
            }
            out["n"] = m->rows();
            out["k"] = color_k;
            out["num_colors"] = coloring.num_colors;
        } else if (*quad) {
            const gmrf::SpectralBounds b{lmin, lmax};
            const gmrf::QuadratureRule rule = gmrf::build_log_quadrature(b, quad_n);
            out["N"] = rule.order;
            out["lambda_min"] = b.lambda_min;
            out["lambda_max"] = b.lambda_max;
            out["predicted_scalar_error"] = gmrf::predicted_scalar_error(b, quad_n);
            json nodes = json::array();
            for (int l = 0; l < rule.order; ++l) {
                nodes.push_back(json{{"alpha", complex_pair(rule.weights[static_cast<std::size_t>(l)])},
                                     {"sigma", complex_pair(rule.shifts[static_cast<std::size_t>(l)])}});
            }
            out["nodes"] = std::move(nodes);
        } else if (*logdet) {
            const gmrf::CsrMatrix q = source.load();
            gmrf::SolverConfig cfg;
            cfg.rel_tol = tol;
            gmrf::LogDetEstimate est;
            if (method == "exact") {
                est.value = gmrf::logdet_exact_dense(q);
                est.method = gmrf::LogDetMethod::ExactDense;
            } else {
                const gmrf::SpectralBounds b = source.bounds(q);
                const int n_quad = logdet_n > 0 ? logdet_n : gmrf::choose_quadrature_order(b, cfg.rel_tol);
                const gmrf::QuadratureRule rule = gmrf::build_log_quadrature(b, n_quad);
                if (method == "probing") {
                    const gmrf::Coloring coloring = gmrf::color_distance_k(gmrf::AdjacencyGraph(q), probe_k);
                    est = gmrf::logdet_probing(q, coloring, rule, cfg,
                                               mode == "signed" ? gmrf::ProbingMode::Signed
                                                                : gmrf::ProbingMode::Indicator,
                                               seed, threads);
                } else {
                    est = gmrf::logdet_hutchinson(q, hutch_s, rule, cfg, seed, level, threads);
                }
                out["quadrature_order"] = n_quad;
            }
            out["value"] = est.value;
            out["method"] = est.method_name();
            out["n"] = q.rows();
            out["num_vectors"] = est.num_vectors;
            out["seed"] = seed;
            out["threads"] = threads;
            out["seed_iterations_total"] = est.stats.total_seed_iterations;
            out["matvecs_total"] = est.stats.total_matvecs;
            if (est.confidence.has_value()) {
                out["confidence"] = json{{"level", est.confidence->level},
                                         {"normal_halfwidth", est.confidence->normal_halfwidth},
                                         {"hoeffding_halfwidth", est.confidence->hoeffding_halfwidth}};
            } else {
                out["confidence"] = nullptr;
            }
        } else if (*fit) {
            const gmrf::GridSpec g = source.grid_spec();
            const std::vector<double> data = read_data_file(data_path, g.size());
            const std::vector<gmrf::SchedulePhase> schedule = gmrf::parse_schedule(schedule_text);
            gmrf::FitOptions opts;
            opts.solver.rel_tol = tol;
            opts.method = fit_method == "exact" ? gmrf::LogDetMethod::ExactDense : gmrf::LogDetMethod::Probing;
            opts.probing_mode = fit_mode == "signed" ? gmrf::ProbingMode::Signed : gmrf::ProbingMode::Indicator;
            opts.seed = seed;
            opts.threads = threads;
            opts.quad_order = fit_n;
            const gmrf::FitResult res =
                gmrf::fit_hyperparams(data, g, {init_kappa, init_tau}, schedule, opts);
            out["kappa"] = res.estimate.kappa;
            out["tau"] = res.estimate.tau;
            out["termination"] = res.trace.termination;
            out["seed"] = seed;
            out["method"] = fit_method;
            out["schedule"] = schedule_text;
            json phases = json::array();
            for (const auto& ph : res.trace.phases) {
                phases.push_back(json{{"k", ph.k},
                                      {"kappa", ph.estimate.kappa},
                                      {"tau", ph.estimate.tau},
                                      {"phi", ph.phi},
                                      {"grad_norm", ph.grad_norm},
                                      {"iterations", ph.iterations}});
            }
            out["phases"] = std::move(phases);
            json iterates = json::array();
            for (const auto& it : res.trace.iterates) {
                iterates.push_back(json{{"phase", it.phase_index},
                                        {"k", it.k},
                                        {"kappa", it.hp.kappa},
                                        {"tau", it.hp.tau},
                                        {"phi", it.phi},
                                        {"grad_norm", it.grad_norm}});
            }
            out["iterates"] = std::move(iterates);
        }
    } catch (const std::exception& e) {
        json err;
        err["error"] = e.what();
        std::cout << err.dump(2) << std::endl;
        return 1;
    }

    out["wall_time_s"] = seconds_since(start);
    std::cout << out.dump(2) << std::endl;
    return 0;
}
