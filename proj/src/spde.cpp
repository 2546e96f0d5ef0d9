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

#include "gmrf/spde.hpp"

#include <sstream>
#include <stdexcept>

namespace gmrf {

index_t GridSpec::size() const {
    index_t total = 1;
    for (index_t e : extents) total *= e;
    return total;
}

void GridSpec::validate() const {
    if (dims() != 2 && dims() != 3) throw std::invalid_argument("GridSpec: dims must be 2 or 3");
    for (index_t e : extents) {
        if (e < 2) throw std::invalid_argument("GridSpec: every extent must be >= 2");
    }
}

GridSpec parse_grid_spec(const std::string& text, Boundary boundary) {
    GridSpec g;
    g.boundary = boundary;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, 'x')) {
        std::size_t used = 0;
        index_t e = 0;
        try {
            e = std::stoll(part, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad grid spec '" + text + "'");
        }
        if (used != part.size()) throw std::invalid_argument("bad grid spec '" + text + "'");
        g.extents.push_back(e);
    }
    g.validate();
    return g;
}

void Hyperparams::validate() const {
    if (!(kappa > 0.0) || !(tau > 0.0)) {
        throw std::invalid_argument("Hyperparams: kappa and tau must be strictly positive");
    }
}

namespace {

// Decomposes node id into grid coordinates; last axis fastest.
void node_coords(const GridSpec& g, index_t node, index_t coords[3]) {
    for (int d = g.dims() - 1; d >= 0; --d) {
        coords[d] = node % g.extents[d];
        node /= g.extents[d];
    }
}

index_t coords_node(const GridSpec& g, const index_t coords[3]) {
    index_t node = 0;
    for (int d = 0; d < g.dims(); ++d) node = node * g.extents[d] + coords[d];
    return node;
}

}  // namespace

CsrMatrix build_laplacian(const GridSpec& g) {
    g.validate();
    const index_t n = g.size();
    const int dims = g.dims();
    std::vector<Triplet> entries;
    entries.reserve(static_cast<std::size_t>(n) * (2 * dims + 1));
    index_t coords[3] = {0, 0, 0};
    for (index_t node = 0; node < n; ++node) {
        node_coords(g, node, coords);
        double diag = 0.0;
        for (int d = 0; d < dims; ++d) {
            for (int step : {-1, +1}) {
                const index_t c = coords[d] + step;
                if (c >= 0 && c < g.extents[d]) {
                    index_t nb[3] = {coords[0], coords[1], coords[2]};
                    nb[d] = c;
                    entries.push_back({node, coords_node(g, nb), -1.0});
                    diag += 1.0;
                } else if (g.boundary == Boundary::Dirichlet) {
                    diag += 1.0;  // ghost value 0 keeps the full 2*dims diagonal
                }
                // Neumann: reflected ghost cancels, neighbour simply dropped.
            }
        }
        entries.push_back({node, node, diag});
    }
    return CsrMatrix::from_triplets(n, std::move(entries));
}

CsrMatrix build_precision(const GridSpec& g, const Hyperparams& h) {
    g.validate();
    h.validate();
    const CsrMatrix lap = build_laplacian(g);

    // M = kappa I + L, then Q = tau^2 M M (M is symmetric).
    detail::RawCsr m = detail::to_raw(lap);
    for (index_t i = 0; i < m.n; ++i) {
        for (index_t t = m.offsets[i]; t < m.offsets[i + 1]; ++t) {
            if (m.cols[t] == i) m.vals[t] += h.kappa;
        }
    }
    detail::RawCsr q = detail::raw_multiply(m, m);
    const double s = h.tau * h.tau;
    for (double& v : q.vals) v *= s;
    return CsrMatrix::from_csr(q.n, std::move(q.offsets), std::move(q.cols), std::move(q.vals));
}

double precision_dlogdet_dtau(const GridSpec& g, const Hyperparams& h) {
    g.validate();
    h.validate();
    return 2.0 * static_cast<double>(g.size()) / h.tau;
}

}  // namespace gmrf
