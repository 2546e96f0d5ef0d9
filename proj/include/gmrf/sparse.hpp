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
#include <span>
#include <vector>

namespace gmrf {

using index_t = std::int64_t;

/// One (row, col, value) entry used when assembling a CsrMatrix.
struct Triplet {
    index_t row;
    index_t col;
    double value;
};

/// Sparse symmetric matrix in compressed-sparse-row form.
///
/// The full symmetric pattern is stored (both triangles). Construction
/// enforces the invariants every downstream solver relies on:
///   - row_offsets nondecreasing, strictly increasing column indices per row,
///   - structural symmetry, with |a_ij - a_ji| <= 1e-12 * max(|a_ij|, 1),
///   - all diagonal entries present and strictly positive.
/// Duplicate input entries are summed; explicit zeros are kept because they
/// define graph structure. Instances are immutable after construction and
/// safe to share across threads.
class CsrMatrix {
  public:
    /// Assemble from triplets. Throws std::invalid_argument on any
    /// invariant violation.
    static CsrMatrix from_triplets(index_t n, std::vector<Triplet> entries);

    /// Adopt already-built CSR arrays (rows must be sorted, no duplicates).
    /// Validates the same invariants as from_triplets without re-sorting.
    static CsrMatrix from_csr(index_t n, std::vector<index_t> row_offsets,
                              std::vector<index_t> col_indices, std::vector<double> values);

    static CsrMatrix identity(index_t n);
    static CsrMatrix diagonal(const std::vector<double>& d);

    index_t rows() const { return n_; }
    index_t nnz() const { return static_cast<index_t>(values_.size()); }

    const std::vector<index_t>& row_offsets() const { return row_offsets_; }
    const std::vector<index_t>& col_indices() const { return col_indices_; }
    const std::vector<double>& values() const { return values_; }

    std::span<const index_t> row_cols(index_t i) const {
        return {col_indices_.data() + row_offsets_[i],
                static_cast<std::size_t>(row_offsets_[i + 1] - row_offsets_[i])};
    }
    std::span<const double> row_values(index_t i) const {
        return {values_.data() + row_offsets_[i],
                static_cast<std::size_t>(row_offsets_[i + 1] - row_offsets_[i])};
    }

    /// y = A x, accumulated left to right within each row so repeated runs
    /// are bitwise identical. Rows are independent, so callers may split the
    /// row range across threads without changing the result.
    void matvec(std::span<const double> x, std::span<double> y) const;
    std::vector<double> matvec(std::span<const double> x) const;

  private:
    CsrMatrix() = default;

    index_t n_ = 0;
    std::vector<index_t> row_offsets_;
    std::vector<index_t> col_indices_;
    std::vector<double> values_;
};

/// Undirected adjacency structure of a matrix pattern: neighbours of node i
/// are the stored off-diagonal columns of row i (explicit zeros included,
/// self loops dropped). Immutable after construction.
class AdjacencyGraph {
  public:
    explicit AdjacencyGraph(const CsrMatrix& a);

    index_t num_nodes() const { return n_; }
    std::span<const index_t> neighbors(index_t i) const {
        return {neighbors_.data() + offsets_[i],
                static_cast<std::size_t>(offsets_[i + 1] - offsets_[i])};
    }

  private:
    index_t n_ = 0;
    std::vector<index_t> offsets_;
    std::vector<index_t> neighbors_;
};

/// All nodes at graph distance <= k from j, in ascending node order
/// (breadth-first levels; k = 0 gives {j}). Throws if j is out of range
/// or k < 0.
std::vector<index_t> graph_distance_ball(const AdjacencyGraph& g, index_t j, int k);

namespace detail {

/// Reusable BFS workspace: stamped visit marks avoid O(n) clearing per call.
class BfsScratch {
  public:
    explicit BfsScratch(index_t n) : stamp_(n, 0), dist_(n, 0) {}

    /// Visits nodes within distance `max_depth` of `root` (max_depth < 0
    /// means unbounded) and calls visit(node, depth) in BFS order.
    template <typename Visit>
    void run(const AdjacencyGraph& g, index_t root, int max_depth, Visit&& visit) {
        ++current_;
        queue_.clear();
        queue_.push_back(root);
        stamp_[root] = current_;
        dist_[root] = 0;
        visit(root, 0);
        for (std::size_t head = 0; head < queue_.size(); ++head) {
            const index_t u = queue_[head];
            const int du = dist_[u];
            if (max_depth >= 0 && du >= max_depth) continue;
            for (index_t v : g.neighbors(u)) {
                if (stamp_[v] == current_) continue;
                stamp_[v] = current_;
                dist_[v] = du + 1;
                queue_.push_back(v);
                visit(v, du + 1);
            }
        }
    }

  private:
    std::vector<std::uint32_t> stamp_;
    std::vector<int> dist_;
    std::vector<index_t> queue_;
    std::uint32_t current_ = 0;
};

// Unvalidated CSR used for intermediate products (which need not be
// symmetric). Final symmetric results go back through CsrMatrix::from_csr.
struct RawCsr {
    index_t n = 0;
    std::vector<index_t> offsets;
    std::vector<index_t> cols;
    std::vector<double> vals;
};

RawCsr to_raw(const CsrMatrix& a);
RawCsr raw_multiply(const RawCsr& a, const RawCsr& b);
RawCsr raw_add(const RawCsr& a, const RawCsr& b, double alpha = 1.0, double beta = 1.0);
RawCsr raw_transpose(const RawCsr& a);

}  // namespace detail

}  // namespace gmrf
