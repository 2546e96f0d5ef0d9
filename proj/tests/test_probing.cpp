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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "gmrf/probing.hpp"
#include "gmrf/spde.hpp"
#include "support/oracles.hpp"

using namespace gmrf;

namespace {

CsrMatrix path_matrix(index_t n) {
    std::vector<Triplet> ts;
    for (index_t i = 0; i < n; ++i) {
        ts.push_back({i, i, 2.0});
        if (i + 1 < n) {
            ts.push_back({i, i + 1, -1.0});
            ts.push_back({i + 1, i, -1.0});
        }
    }
    return CsrMatrix::from_triplets(n, std::move(ts));
}

// Exhaustive validity oracle: BFS from every node checks that no two
// same-colored nodes sit within distance k.
bool coloring_valid(const AdjacencyGraph& g, const Coloring& c) {
    for (index_t v = 0; v < g.num_nodes(); ++v) {
        for (index_t u : graph_distance_ball(g, v, c.k)) {
            if (u != v && c.color_of[static_cast<std::size_t>(u)] == c.color_of[static_cast<std::size_t>(v)]) return false;
        }
    }
    return true;
}

Coloring two_color_manual() {
    Coloring c;
    c.k = 1;
    c.color_of = {0, 1, 0, 1};
    c.num_colors = 2;
    return c;
}

}  // namespace

TEST_CASE("path graph is two-colored alternately at distance 1") {
    const Coloring c = color_distance_k(AdjacencyGraph(path_matrix(5)), 1);
    CHECK(c.num_colors == 2);
    CHECK(c.color_of == std::vector<std::int32_t>{0, 1, 0, 1, 0});
}

TEST_CASE("the 4-neighbour grid graph is checkerboarded at distance 1") {
    const CsrMatrix lap = build_laplacian(GridSpec{{8, 8}, Boundary::Neumann});
    const Coloring c = color_distance_k(AdjacencyGraph(lap), 1);
    CHECK(c.num_colors == 2);
    for (index_t i = 0; i < 8; ++i) {
        for (index_t j = 0; j < 8; ++j) {
            CHECK(c.color_of[static_cast<std::size_t>(8 * i + j)] == ((i + j) % 2));
        }
    }
}

TEST_CASE("distance-2 coloring of the grid graph is valid with a small color count") {
    const CsrMatrix lap = build_laplacian(GridSpec{{8, 8}, Boundary::Neumann});
    const AdjacencyGraph g(lap);
    const Coloring c = color_distance_k(g, 2);
    CHECK(coloring_valid(g, c));
    CHECK(c.num_colors >= 5);  // a distance-2 ball needs at least 5 colors
    CHECK(c.num_colors <= 8);
}

TEST_CASE("colorings are valid for k in 1..4 on grid and squared-stencil graphs") {
    const GridSpec g{{16, 16}, Boundary::Neumann};
    const AdjacencyGraph grid_graph(build_laplacian(g));
    const AdjacencyGraph q_graph(build_precision(g, {1.0, 1.0}));
    for (int k = 1; k <= 4; ++k) {
        const Coloring cg = color_distance_k(grid_graph, k);
        const Coloring cq = color_distance_k(q_graph, k);
        CHECK(coloring_valid(grid_graph, cg));
        CHECK(coloring_valid(q_graph, cq));
        for (int col = 0; col < cq.num_colors; ++col) {
            CHECK(!cq.color_class(col).empty());  // every color nonempty
        }
    }
}

TEST_CASE("color count is essentially independent of grid granularity") {
    // The claim applies once the distance-k ball fits well inside the
    // coarsest grid; a distance-6 class on 8x8 would need more colors than
    // the grid has nodes, so k stays small relative to the 8-wide grid.
    for (const int k : {1, 2, 3, 4, 5}) {  // grid graph: ball diameter 2k
        std::vector<int> counts;
        for (const index_t e : {8, 16, 32}) {
            const CsrMatrix lap = build_laplacian(GridSpec{{e, e}, Boundary::Neumann});
            counts.push_back(color_distance_k(AdjacencyGraph(lap), k).num_colors);
        }
        const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
        CHECK(*hi - *lo <= 2);
    }
    for (const int k : {1, 2}) {  // squared stencil: ball diameter ~4k
        std::vector<int> counts;
        for (const index_t e : {8, 16, 32}) {
            const CsrMatrix q = build_precision(GridSpec{{e, e}, Boundary::Neumann}, {1.0, 1.0});
            counts.push_back(color_distance_k(AdjacencyGraph(q), k).num_colors);
        }
        const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
        CHECK(*hi - *lo <= 2);
    }
    // Far from the boundary-affected regime the count saturates entirely.
    for (const int k : {4, 6}) {
        std::vector<int> counts;
        for (const index_t e : {32, 48}) {
            const CsrMatrix q = build_precision(GridSpec{{e, e}, Boundary::Neumann}, {1.0, 1.0});
            counts.push_back(color_distance_k(AdjacencyGraph(q), k).num_colors);
        }
        CHECK(std::abs(counts[0] - counts[1]) <= 2);
    }
}

TEST_CASE("indicator probing vectors are the color-class indicators") {
    const Coloring c = two_color_manual();
    const std::vector<ProbingVector> vs = probing_vectors(c, ProbingMode::Indicator, 0);
    REQUIRE(vs.size() == 2);
    std::vector<double> v(4);
    vs[0].fill_dense(c, v);
    CHECK(v == std::vector<double>{1.0, 0.0, 1.0, 0.0});
    vs[1].fill_dense(c, v);
    CHECK(v == std::vector<double>{0.0, 1.0, 0.0, 1.0});
}

TEST_CASE("signed probing vectors keep the support and flip only signs") {
    const Coloring c = two_color_manual();
    const std::vector<ProbingVector> vs = probing_vectors(c, ProbingMode::Signed, 1234);
    std::size_t support_total = 0;
    for (const auto& pv : vs) {
        std::vector<double> v(4);
        pv.fill_dense(c, v);
        for (std::size_t i = 0; i < 4; ++i) {
            const bool on_class = c.color_of[i] == pv.color;
            if (on_class) {
                CHECK(std::abs(v[i]) == 1.0);
                ++support_total;
            } else {
                CHECK(v[i] == 0.0);
            }
        }
        // Deterministic in the seed.
        std::vector<double> again(4);
        pv.fill_dense(c, again);
        CHECK(v == again);
    }
    CHECK(support_total == 4);  // classes partition the coordinates
}

TEST_CASE("indicator probing sums the trace plus same-color cross terms exactly") {
    const GridSpec g{{8, 8}, Boundary::Neumann};
    const CsrMatrix q = build_precision(g, {1.0, 1.0});
    const Coloring c = color_distance_k(AdjacencyGraph(q), 2);
    const Eigen::MatrixXd f = oracle::logm_dense(q);  // f(Q) = log(Q)

    double probing_sum = 0.0;
    std::vector<double> v(static_cast<std::size_t>(q.rows()));
    for (const auto& pv : probing_vectors(c, ProbingMode::Indicator, 0)) {
        pv.fill_dense(c, v);
        const Eigen::VectorXd ev = oracle::to_eigen(v);
        probing_sum += ev.dot(f * ev);
    }
    double expected = f.trace();
    for (index_t i = 0; i < q.rows(); ++i) {
        for (index_t j = 0; j < q.rows(); ++j) {
            if (i != j && c.color_of[static_cast<std::size_t>(i)] == c.color_of[static_cast<std::size_t>(j)]) expected += f(i, j);
        }
    }
    CHECK(probing_sum == doctest::Approx(expected).epsilon(1e-11));
}

TEST_CASE("signed probing is unbiased for the trace across seeds") {
    const GridSpec g{{8, 8}, Boundary::Neumann};
    const CsrMatrix q = build_precision(g, {0.5, 1.0});
    const Coloring c = color_distance_k(AdjacencyGraph(q), 2);
    const Eigen::MatrixXd f = oracle::logm_dense(q);
    const double trace = f.trace();

    const int num_seeds = 50;
    std::vector<double> values;
    std::vector<double> v(static_cast<std::size_t>(q.rows()));
    for (int s = 0; s < num_seeds; ++s) {
        double sum = 0.0;
        for (const auto& pv : probing_vectors(c, ProbingMode::Signed, static_cast<std::uint64_t>(s))) {
            pv.fill_dense(c, v);
            const Eigen::VectorXd ev = oracle::to_eigen(v);
            sum += ev.dot(f * ev);
        }
        values.push_back(sum);
    }
    double mean = 0.0;
    for (double x : values) mean += x;
    mean /= num_seeds;
    double var = 0.0;
    for (double x : values) var += (x - mean) * (x - mean);
    var /= (num_seeds - 1);
    const double se = std::sqrt(var / num_seeds);
    CHECK(std::abs(mean - trace) <= 3.0 * se + 1e-9);
}

TEST_CASE("probing distance of a diagonal matrix is zero") {
    const CsrMatrix q = CsrMatrix::diagonal(std::vector<double>(9, 2.0));
    const auto op = [&](index_t j) { return oracle::logm_apply(q, [&] {
        std::vector<double> e(9, 0.0);
        e[static_cast<std::size_t>(j)] = 1.0;
        return e;
    }()); };
    const std::vector<index_t> nodes = {4};
    CHECK(estimate_probing_distance(q, 1e-6, nodes, op) == 0);
}

TEST_CASE("probing distance matches a direct ring scan of the dense log") {
    const GridSpec g{{16, 16}, Boundary::Neumann};
    const CsrMatrix q = build_precision(g, {1.0, 1.0});
    const double eps = 1e-3;
    const index_t center = q.rows() / 2;
    const auto op = [&](index_t j) {
        std::vector<double> e(static_cast<std::size_t>(q.rows()), 0.0);
        e[static_cast<std::size_t>(j)] = 1.0;
        return oracle::logm_apply(q, e);
    };
    const std::vector<index_t> nodes = {center};
    const int got = estimate_probing_distance(q, eps, nodes, op);

    // Independent oracle: group |log(Q) e_j| by BFS distance and scan.
    const std::vector<double> w = op(center);
    const AdjacencyGraph graph(q);
    std::vector<double> ring_max;
    for (index_t u = 0; u < q.rows(); ++u) {
        int d = -1;
        // distance via nested balls (slow but independent)
        for (int probe = 0; probe < 64 && d < 0; ++probe) {
            const auto ball = graph_distance_ball(graph, center, probe);
            if (std::binary_search(ball.begin(), ball.end(), u)) d = probe;
        }
        REQUIRE(d >= 0);
        if (d >= static_cast<int>(ring_max.size())) ring_max.resize(static_cast<std::size_t>(d) + 1, 0.0);
        ring_max[static_cast<std::size_t>(d)] = std::max(ring_max[static_cast<std::size_t>(d)], std::abs(w[static_cast<std::size_t>(u)]));
    }
    int first_quiet = static_cast<int>(ring_max.size());
    for (std::size_t d = 0; d < ring_max.size(); ++d) {
        if (ring_max[d] < eps) {
            first_quiet = static_cast<int>(d);
            break;
        }
    }
    CHECK(got == first_quiet - 1);
    CHECK(got >= 1);
}

TEST_CASE("longer range (smaller kappa) needs at least the probing distance of shorter range") {
    const GridSpec g{{16, 16}, Boundary::Neumann};
    const CsrMatrix q_long = build_precision(g, {0.1, 1.0});
    const CsrMatrix q_short = build_precision(g, {1.0, 1.0});
    const auto make_op = [](const CsrMatrix& q) {
        return [&q](index_t j) {
            std::vector<double> e(static_cast<std::size_t>(q.rows()), 0.0);
            e[static_cast<std::size_t>(j)] = 1.0;
            return oracle::logm_apply(q, e);
        };
    };
    const std::vector<index_t> nodes = {q_long.rows() / 2};
    const int d_long = estimate_probing_distance(q_long, 1e-3, nodes, make_op(q_long));
    const int d_short = estimate_probing_distance(q_short, 1e-3, nodes, make_op(q_short));
    CHECK(d_long >= d_short);
}

TEST_CASE("an eps above the diagonal entry is rejected as degenerate") {
    const GridSpec g{{6, 6}, Boundary::Neumann};
    const CsrMatrix q = build_precision(g, {1.0, 1.0});
    const auto op = [&](index_t j) {
        std::vector<double> e(static_cast<std::size_t>(q.rows()), 0.0);
        e[static_cast<std::size_t>(j)] = 1.0;
        return oracle::logm_apply(q, e);
    };
    const std::vector<index_t> nodes = {18};
    CHECK_THROWS_AS((void)estimate_probing_distance(q, 100.0, nodes, op), std::invalid_argument);
}

TEST_CASE("default probe nodes are three distinct in-range nodes") {
    const std::vector<index_t> nodes = default_probe_nodes(100, 7);
    CHECK(nodes.size() == 3);
    CHECK(std::set<index_t>(nodes.begin(), nodes.end()).size() == 3);
    for (index_t n : nodes) {
        CHECK(n >= 0);
        CHECK(n < 100);
    }
    CHECK(nodes[0] == 50);  // center first
}
