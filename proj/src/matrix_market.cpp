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

#include "gmrf/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace gmrf {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

}  // namespace

CsrMatrix read_matrix_market(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("matrix market: empty stream");
    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || lower(object) != "matrix" || lower(format) != "coordinate" ||
        lower(field) != "real" || lower(symmetry) != "symmetric") {
        throw std::runtime_error("matrix market: expected 'matrix coordinate real symmetric' header, got: " + line);
    }

    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '%') break;
    }
    std::istringstream dims(line);
    index_t rows = 0, cols = 0, entries = 0;
    if (!(dims >> rows >> cols >> entries)) throw std::runtime_error("matrix market: bad size line");
    if (rows != cols) throw std::runtime_error("matrix market: matrix must be square");

    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(2 * entries));
    for (index_t e = 0; e < entries; ++e) {
        index_t i = 0, j = 0;
        double v = 0.0;
        if (!(in >> i >> j >> v)) throw std::runtime_error("matrix market: truncated entry list");
        if (i < 1 || i > rows || j < 1 || j > cols) throw std::runtime_error("matrix market: index out of range");
        triplets.push_back({i - 1, j - 1, v});
        if (i != j) triplets.push_back({j - 1, i - 1, v});
    }
    return CsrMatrix::from_triplets(rows, std::move(triplets));
}

CsrMatrix read_matrix_market_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open matrix file: " + path);
    return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const CsrMatrix& a) {
    index_t lower_nnz = 0;
    for (index_t i = 0; i < a.rows(); ++i) {
        for (index_t j : a.row_cols(i)) {
            if (j <= i) ++lower_nnz;
        }
    }
    out << "%%MatrixMarket matrix coordinate real symmetric\n";
    out << a.rows() << ' ' << a.rows() << ' ' << lower_nnz << '\n';
    out << std::setprecision(17);
    for (index_t i = 0; i < a.rows(); ++i) {
        const auto cols = a.row_cols(i);
        const auto vals = a.row_values(i);
        for (std::size_t t = 0; t < cols.size(); ++t) {
            if (cols[t] > i) break;
            out << (i + 1) << ' ' << (cols[t] + 1) << ' ' << vals[t] << '\n';
        }
    }
}

void write_matrix_market_file(const std::string& path, const CsrMatrix& a) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    write_matrix_market(out, a);
}

}  // namespace gmrf
