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

#include "gmrf/probing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gmrf/rng.hpp"

namespace gmrf {

std::vector<index_t> Coloring::color_class(int color) const {
    std::vector<index_t> nodes;
    for (index_t i = 0; i < num_nodes(); ++i) {
        if (color_of[static_cast<std::size_t>(i)] == color) nodes.push_back(i);
    }
    return nodes;
}

Coloring color_distance_k(const AdjacencyGraph& g, int k) {
    if (k < 1) throw std::invalid_argument("color_distance_k: k must be >= 1");
    const index_t n = g.num_nodes();
    Coloring c;
    c.k = k;
    c.color_of.assign(static_cast<std::size_t>(n), -1);

    detail::BfsScratch scratch(n);
    std::vector<char> used;  // colors seen in the current ball
    std::vector<std::int32_t> seen;
    for (index_t v = 0; v < n; ++v) {
        seen.clear();
        scratch.run(g, v, k, [&](index_t u, int) {
            const std::int32_t col = c.color_of[static_cast<std::size_t>(u)];
            if (col >= 0) {
                if (col >= static_cast<std::int32_t>(used.size())) used.resize(static_cast<std::size_t>(col) + 1, 0);
                if (!used[static_cast<std::size_t>(col)]) {
                    used[static_cast<std::size_t>(col)] = 1;
                    seen.push_back(col);
                }
            }
        });
        std::int32_t color = 0;
        while (color < static_cast<std::int32_t>(used.size()) && used[static_cast<std::size_t>(color)]) ++color;
        c.color_of[static_cast<std::size_t>(v)] = color;
        c.num_colors = std::max(c.num_colors, color + 1);
        for (std::int32_t col : seen) used[static_cast<std::size_t>(col)] = 0;
    }
    return c;
}

void ProbingVector::fill_dense(const Coloring& c, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (index_t i = 0; i < c.num_nodes(); ++i) {
        if (c.color_of[static_cast<std::size_t>(i)] == color) out[static_cast<std::size_t>(i)] = entry(i);
    }
}

double ProbingVector::entry(index_t node) const {
    if (mode == ProbingMode::Indicator) return 1.0;
    return rademacher(seed, static_cast<std::uint64_t>(color), static_cast<std::uint64_t>(node));
}

std::vector<ProbingVector> probing_vectors(const Coloring& c, ProbingMode mode, std::uint64_t seed) {
    std::vector<ProbingVector> vs;
    vs.reserve(static_cast<std::size_t>(c.num_colors));
    for (std::int32_t col = 0; col < c.num_colors; ++col) vs.push_back({col, mode, seed});
    return vs;
}

int estimate_probing_distance(const CsrMatrix& q, double eps, std::span<const index_t> sample_nodes,
                              const std::function<std::vector<double>(index_t)>& apply_log_basis) {
    if (!(eps > 0.0)) throw std::invalid_argument("estimate_probing_distance: eps must be positive");
    if (sample_nodes.empty()) throw std::invalid_argument("estimate_probing_distance: no sample nodes");
    const AdjacencyGraph g(q);
    detail::BfsScratch scratch(q.rows());

    int overall = 0;
    std::vector<double> ring_max;
    for (index_t j : sample_nodes) {
        if (j < 0 || j >= q.rows()) throw std::invalid_argument("estimate_probing_distance: node out of range");
        const std::vector<double> w = apply_log_basis(j);
        if (static_cast<index_t>(w.size()) != q.rows()) {
            throw std::invalid_argument("estimate_probing_distance: operator returned wrong dimension");
        }
        if (std::abs(w[static_cast<std::size_t>(j)]) < eps) {
            throw std::invalid_argument(
                "estimate_probing_distance: eps exceeds |log(Q)e_j| at the sample node; heuristic degenerate");
        }
        ring_max.clear();
        scratch.run(g, j, -1, [&](index_t u, int d) {
            if (d >= static_cast<int>(ring_max.size())) ring_max.resize(static_cast<std::size_t>(d) + 1, 0.0);
            ring_max[static_cast<std::size_t>(d)] =
                std::max(ring_max[static_cast<std::size_t>(d)], std::abs(w[static_cast<std::size_t>(u)]));
        });
        int first_quiet = static_cast<int>(ring_max.size());  // past the eccentricity
        for (std::size_t d = 0; d < ring_max.size(); ++d) {
            if (ring_max[d] < eps) {
                first_quiet = static_cast<int>(d);
                break;
            }
        }
        overall = std::max(overall, first_quiet);
    }
    return overall - 1;
}

std::vector<index_t> default_probe_nodes(index_t n, std::uint64_t seed) {
    std::vector<index_t> nodes;
    nodes.push_back(n / 2);
    for (std::uint64_t s = 0; nodes.size() < 3 && s < 64; ++s) {
        const index_t candidate = static_cast<index_t>(mix_seed(seed, 11, s) % static_cast<std::uint64_t>(n));
        if (std::find(nodes.begin(), nodes.end(), candidate) == nodes.end()) nodes.push_back(candidate);
    }
    return nodes;
}

}  // namespace gmrf
