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

#include "gmrf/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gmrf {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument("CsrMatrix: " + msg); }

double lookup(const CsrMatrix& a, index_t i, index_t j, bool& found) {
    const auto cols = a.row_cols(i);
    const auto it = std::lower_bound(cols.begin(), cols.end(), j);
    found = (it != cols.end() && *it == j);
    if (!found) return 0.0;
    return a.row_values(i)[static_cast<std::size_t>(it - cols.begin())];
}

void validate(const CsrMatrix& a) {
    const index_t n = a.rows();
    const auto& offsets = a.row_offsets();
    if (static_cast<index_t>(offsets.size()) != n + 1) fail("row_offsets length must be n+1");
    if (offsets[0] != 0) fail("row_offsets must start at 0");
    for (index_t i = 0; i < n; ++i) {
        if (offsets[i + 1] < offsets[i]) fail("row_offsets must be nondecreasing");
    }
    if (offsets[n] != a.nnz()) fail("row_offsets[n] must equal nnz");

    for (index_t i = 0; i < n; ++i) {
        const auto cols = a.row_cols(i);
        bool has_diag = false;
        for (std::size_t t = 0; t < cols.size(); ++t) {
            const index_t j = cols[t];
            if (j < 0 || j >= n) fail("column index out of range");
            if (t > 0 && cols[t - 1] >= j) fail("columns within a row must be strictly increasing");
            if (j == i) {
                has_diag = true;
                if (!(a.row_values(i)[t] > 0.0)) fail("diagonal entries must be strictly positive");
            }
        }
        if (!has_diag) fail("diagonal entry missing in row " + std::to_string(i));
    }

    // Structural symmetry plus the numeric tolerance on mirrored values.
    for (index_t i = 0; i < n; ++i) {
        const auto cols = a.row_cols(i);
        const auto vals = a.row_values(i);
        for (std::size_t t = 0; t < cols.size(); ++t) {
            const index_t j = cols[t];
            if (j <= i) continue;
            bool found = false;
            const double aji = lookup(a, j, i, found);
            if (!found) fail("pattern not symmetric: (" + std::to_string(i) + "," + std::to_string(j) + ") stored without its mirror");
            const double aij = vals[t];
            const double tol = 1e-12 * std::max({std::abs(aij), std::abs(aji), 1.0});
            if (std::abs(aij - aji) > tol) fail("values not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
        }
    }
}

}  // namespace

CsrMatrix CsrMatrix::from_triplets(index_t n, std::vector<Triplet> entries) {
    if (n <= 0) fail("dimension must be positive");
    for (const auto& t : entries) {
        if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n) fail("triplet index out of range");
    }
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    CsrMatrix m;
    m.n_ = n;
    m.row_offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
    m.col_indices_.reserve(entries.size());
    m.values_.reserve(entries.size());
    for (std::size_t t = 0; t < entries.size();) {
        const index_t i = entries[t].row;
        const index_t j = entries[t].col;
        double sum = 0.0;
        while (t < entries.size() && entries[t].row == i && entries[t].col == j) {
            sum += entries[t].value;  // duplicates are summed
            ++t;
        }
        m.col_indices_.push_back(j);
        m.values_.push_back(sum);
        ++m.row_offsets_[i + 1];
    }
    for (index_t i = 0; i < n; ++i) m.row_offsets_[i + 1] += m.row_offsets_[i];
    validate(m);
    return m;
}

CsrMatrix CsrMatrix::from_csr(index_t n, std::vector<index_t> row_offsets,
                              std::vector<index_t> col_indices, std::vector<double> values) {
    if (n <= 0) fail("dimension must be positive");
    if (col_indices.size() != values.size()) fail("col_indices and values length mismatch");
    CsrMatrix m;
    m.n_ = n;
    m.row_offsets_ = std::move(row_offsets);
    m.col_indices_ = std::move(col_indices);
    m.values_ = std::move(values);
    validate(m);
    return m;
}

CsrMatrix CsrMatrix::identity(index_t n) {
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(n));
    for (index_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return from_triplets(n, std::move(t));
}

CsrMatrix CsrMatrix::diagonal(const std::vector<double>& d) {
    std::vector<Triplet> t;
    t.reserve(d.size());
    for (index_t i = 0; i < static_cast<index_t>(d.size()); ++i) t.push_back({i, i, d[static_cast<std::size_t>(i)]});
    return from_triplets(static_cast<index_t>(d.size()), std::move(t));
}

void CsrMatrix::matvec(std::span<const double> x, std::span<double> y) const {
    if (static_cast<index_t>(x.size()) != n_ || static_cast<index_t>(y.size()) != n_) {
        fail("matvec dimension mismatch");
    }
    for (index_t i = 0; i < n_; ++i) {
        double acc = 0.0;
        for (index_t t = row_offsets_[i]; t < row_offsets_[i + 1]; ++t) {
            acc += values_[t] * x[static_cast<std::size_t>(col_indices_[t])];
        }
        y[static_cast<std::size_t>(i)] = acc;
    }
}

std::vector<double> CsrMatrix::matvec(std::span<const double> x) const {
    std::vector<double> y(static_cast<std::size_t>(n_));
    matvec(x, y);
    return y;
}

AdjacencyGraph::AdjacencyGraph(const CsrMatrix& a) : n_(a.rows()) {
    offsets_.assign(static_cast<std::size_t>(n_) + 1, 0);
    for (index_t i = 0; i < n_; ++i) {
        for (index_t j : a.row_cols(i)) {
            if (j != i) ++offsets_[i + 1];
        }
    }
    for (index_t i = 0; i < n_; ++i) offsets_[i + 1] += offsets_[i];
    neighbors_.resize(static_cast<std::size_t>(offsets_[n_]));
    std::vector<index_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (index_t i = 0; i < n_; ++i) {
        for (index_t j : a.row_cols(i)) {
            if (j != i) neighbors_[static_cast<std::size_t>(cursor[i]++)] = j;
        }
    }
}

std::vector<index_t> graph_distance_ball(const AdjacencyGraph& g, index_t j, int k) {
    if (j < 0 || j >= g.num_nodes()) throw std::invalid_argument("graph_distance_ball: node out of range");
    if (k < 0) throw std::invalid_argument("graph_distance_ball: negative distance");
    detail::BfsScratch scratch(g.num_nodes());
    std::vector<index_t> ball;
    scratch.run(g, j, k, [&](index_t v, int) { ball.push_back(v); });
    std::sort(ball.begin(), ball.end());
    return ball;
}

namespace detail {

RawCsr to_raw(const CsrMatrix& a) {
    return RawCsr{a.rows(), a.row_offsets(), a.col_indices(), a.values()};
}

RawCsr raw_multiply(const RawCsr& a, const RawCsr& b) {
    RawCsr c;
    c.n = a.n;
    c.offsets.assign(static_cast<std::size_t>(a.n) + 1, 0);
    // Row-merge with a stamped dense accumulator.
    std::vector<double> acc(static_cast<std::size_t>(b.n), 0.0);
    std::vector<index_t> mark(static_cast<std::size_t>(b.n), -1);
    std::vector<index_t> cols_in_row;
    for (index_t i = 0; i < a.n; ++i) {
        cols_in_row.clear();
        for (index_t t = a.offsets[i]; t < a.offsets[i + 1]; ++t) {
            const index_t j = a.cols[t];
            const double aij = a.vals[t];
            for (index_t u = b.offsets[j]; u < b.offsets[j + 1]; ++u) {
                const index_t col = b.cols[u];
                if (mark[col] != i) {
                    mark[col] = i;
                    acc[col] = 0.0;
                    cols_in_row.push_back(col);
                }
                acc[col] += aij * b.vals[u];
            }
        }
        std::sort(cols_in_row.begin(), cols_in_row.end());
        for (index_t col : cols_in_row) {
            c.cols.push_back(col);
            c.vals.push_back(acc[col]);
        }
        c.offsets[i + 1] = static_cast<index_t>(c.cols.size());
    }
    return c;
}

RawCsr raw_add(const RawCsr& a, const RawCsr& b, double alpha, double beta) {
    RawCsr c;
    c.n = a.n;
    c.offsets.assign(static_cast<std::size_t>(a.n) + 1, 0);
    for (index_t i = 0; i < a.n; ++i) {
        index_t ta = a.offsets[i], tb = b.offsets[i];
        while (ta < a.offsets[i + 1] || tb < b.offsets[i + 1]) {
            index_t ja = ta < a.offsets[i + 1] ? a.cols[ta] : a.n;
            index_t jb = tb < b.offsets[i + 1] ? b.cols[tb] : b.n;
            if (ja == jb) {
                c.cols.push_back(ja);
                c.vals.push_back(alpha * a.vals[ta++] + beta * b.vals[tb++]);
            } else if (ja < jb) {
                c.cols.push_back(ja);
                c.vals.push_back(alpha * a.vals[ta++]);
            } else {
                c.cols.push_back(jb);
                c.vals.push_back(beta * b.vals[tb++]);
            }
        }
        c.offsets[i + 1] = static_cast<index_t>(c.cols.size());
    }
    return c;
}

RawCsr raw_transpose(const RawCsr& a) {
    RawCsr t;
    t.n = a.n;
    t.offsets.assign(static_cast<std::size_t>(a.n) + 1, 0);
    t.cols.resize(a.cols.size());
    t.vals.resize(a.vals.size());
    for (index_t e = 0; e < static_cast<index_t>(a.cols.size()); ++e) ++t.offsets[a.cols[e] + 1];
    for (index_t i = 0; i < a.n; ++i) t.offsets[i + 1] += t.offsets[i];
    std::vector<index_t> cursor(t.offsets.begin(), t.offsets.end() - 1);
    for (index_t i = 0; i < a.n; ++i) {
        for (index_t e = a.offsets[i]; e < a.offsets[i + 1]; ++e) {
            const index_t pos = cursor[a.cols[e]]++;
            t.cols[static_cast<std::size_t>(pos)] = i;
            t.vals[static_cast<std::size_t>(pos)] = a.vals[e];
        }
    }
    return t;
}

}  // namespace detail

}  // namespace gmrf
