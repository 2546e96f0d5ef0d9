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
#include <functional>
#include <span>
#include <vector>

#include "gmrf/sparse.hpp"

namespace gmrf {

/// Distance-k graph coloring: nodes sharing a color are more than k edges
/// apart, so the indicator of each color class probes the trace without
/// cross terms up to range k.
struct Coloring {
    int k = 0;
    std::vector<std::int32_t> color_of;
    int num_colors = 0;

    index_t num_nodes() const { return static_cast<index_t>(color_of.size()); }
    std::vector<index_t> color_class(int color) const;
};

/// Greedy distance-k coloring in natural node order: each node takes the
/// smallest color absent from its distance-<=k ball. Deterministic; always
/// succeeds. The ball is walked by BFS rather than by forming Q^k.
Coloring color_distance_k(const AdjacencyGraph& g, int k);

enum class ProbingMode {
    Indicator,  // entries 1 on the color class
    Signed,     // Rademacher +-1 on the color class (unbiased estimator)
};

/// Implicit probing vector: support is one color class, entries are 1 or
/// seeded +-1. Nothing is stored per node; values are recomputed on the fly.
struct ProbingVector {
    std::int32_t color = 0;
    ProbingMode mode = ProbingMode::Signed;
    std::uint64_t seed = 0;

    /// Writes the dense vector (zero off the support) into out.
    void fill_dense(const Coloring& c, std::span<double> out) const;
    double entry(index_t node) const;  // value on a support node
};

/// One probing vector per color; signed entries are a pure function of
/// (seed, color, node), so any evaluation order yields identical vectors.
std::vector<ProbingVector> probing_vectors(const Coloring& c, ProbingMode mode, std::uint64_t seed);

/// Heuristic probing distance: for each sample node j, w = log(Q) e_j is
/// scanned by BFS rings around j; the first distance whose ring maximum
/// falls below eps marks where entries stop mattering. Returns
/// max_j(first quiet ring) - 1. Throws if eps is not smaller than |w_j|
/// itself (the heuristic degenerates).
int estimate_probing_distance(const CsrMatrix& q, double eps, std::span<const index_t> sample_nodes,
                              const std::function<std::vector<double>(index_t)>& apply_log_basis);

/// Default sample nodes: the grid/graph "center" node plus two seeded
/// pseudo-random nodes, guarding against boundary effects.
std::vector<index_t> default_probe_nodes(index_t n, std::uint64_t seed);

}  // namespace gmrf
