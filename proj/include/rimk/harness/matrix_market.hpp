#pragma once

// Matrix Market reader: coordinate and array formats, real or integer fields,
// general / symmetric / skew-symmetric storage. Coordinate files become CSR
// (duplicates summed), array files become dense.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "rimk/errors.hpp"
#include "rimk/linalg.hpp"
#include "rimk/random.hpp"

namespace rimk {

namespace mm_detail {

inline std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])) != 0) ++i;
        const std::size_t start = i;
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])) == 0) ++i;
        if (i > start) tokens.push_back(line.substr(start, i - start));
    }
    return tokens;
}

template <class T>
T parse_number(std::string_view token, std::size_t line_no) {
    T value{};
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (!token.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw IoError("cannot parse '" + std::string(token) + "' as a number", line_no);
    }
    return value;
}

enum class Symmetry { General, Symmetric, Skew };

}  // namespace mm_detail

inline Matrix read_matrix_market(std::istream& in) {
    using namespace mm_detail;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw IoError("empty file: missing %%MatrixMarket banner", 1);
    ++line_no;
    const auto banner = split(line);
    if (banner.size() != 5 || lower(banner[0]) != "%%matrixmarket" || lower(banner[1]) != "matrix") {
        throw IoError("expected '%%MatrixMarket matrix <format> <field> <symmetry>'", line_no);
    }
    const auto format = lower(banner[2]);
    const auto field = lower(banner[3]);
    const auto symmetry_name = lower(banner[4]);
    if (format != "coordinate" && format != "array") throw IoError("unknown format '" + format + "'", line_no);
    if (field == "complex" || field == "pattern") {
        throw UnsupportedFormat("field '" + field + "' is not supported (real or integer only)", line_no);
    }
    if (field != "real" && field != "integer" && field != "double") {
        throw IoError("unknown field '" + field + "'", line_no);
    }
    Symmetry symmetry;
    if (symmetry_name == "general") {
        symmetry = Symmetry::General;
    } else if (symmetry_name == "symmetric") {
        symmetry = Symmetry::Symmetric;
    } else if (symmetry_name == "skew-symmetric") {
        symmetry = Symmetry::Skew;
    } else if (symmetry_name == "hermitian") {
        throw UnsupportedFormat("hermitian storage is not supported", line_no);
    } else {
        throw IoError("unknown symmetry '" + symmetry_name + "'", line_no);
    }

    // Next non-comment, non-blank line; returns false at end of input.
    std::vector<std::string_view> tokens;
    auto next_data_line = [&]() {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line[0] == '%') continue;
            tokens = split(line);
            if (!tokens.empty()) return true;
        }
        return false;
    };

    if (!next_data_line()) throw IoError("missing size line", line_no + 1);
    const bool coordinate = format == "coordinate";
    if (tokens.size() != (coordinate ? 3u : 2u)) throw IoError("malformed size line", line_no);
    const auto m = parse_number<std::size_t>(tokens[0], line_no);
    const auto n = parse_number<std::size_t>(tokens[1], line_no);
    if (symmetry != Symmetry::General && m != n) throw IoError("symmetric storage requires a square matrix", line_no);

    if (!coordinate) {
        std::vector<double> dense(m * n, 0.0);
        auto put = [&](std::size_t i, std::size_t j, double v) {
            dense[i * n + j] = v;
            if (i != j && symmetry == Symmetry::Symmetric) dense[j * n + i] = v;
            if (i != j && symmetry == Symmetry::Skew) dense[j * n + i] = -v;
        };
        for (std::size_t j = 0; j < n; ++j) {
            // general: full columns; symmetric: lower triangle incl. diagonal; skew: strictly lower
            const std::size_t first = symmetry == Symmetry::General ? 0 : (symmetry == Symmetry::Skew ? j + 1 : j);
            for (std::size_t i = first; i < m; ++i) {
                if (!next_data_line()) throw IoError("too few array entries", line_no + 1);
                if (tokens.size() != 1) throw IoError("array entries hold one value per line", line_no);
                put(i, j, parse_number<double>(tokens[0], line_no));
            }
        }
        if (next_data_line()) throw IoError("unexpected trailing data", line_no);
        return Matrix::dense(m, n, std::move(dense));
    }

    const auto nnz = parse_number<std::size_t>(tokens[2], line_no);
    std::vector<std::tuple<std::size_t, std::size_t, double>> triples;
    triples.reserve(symmetry == Symmetry::General ? nnz : 2 * nnz);
    for (std::size_t e = 0; e < nnz; ++e) {
        if (!next_data_line()) {
            throw IoError("expected " + std::to_string(nnz) + " entries, found " + std::to_string(e), line_no + 1);
        }
        if (tokens.size() != 3) throw IoError("coordinate entries need 'row col value'", line_no);
        const auto i = parse_number<std::size_t>(tokens[0], line_no);
        const auto j = parse_number<std::size_t>(tokens[1], line_no);
        const auto v = parse_number<double>(tokens[2], line_no);
        if (i < 1 || i > m || j < 1 || j > n) throw IoError("entry index out of range", line_no);
        triples.emplace_back(i - 1, j - 1, v);
        if (i != j && symmetry == Symmetry::Symmetric) triples.emplace_back(j - 1, i - 1, v);
        if (i != j && symmetry == Symmetry::Skew) triples.emplace_back(j - 1, i - 1, -v);
    }
    if (next_data_line()) throw IoError("unexpected trailing data", line_no);

    std::sort(triples.begin(), triples.end(), [](const auto& a, const auto& b) {
        return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    std::vector<std::size_t> row_ptr(m + 1, 0);
    std::vector<std::size_t> cols;
    std::vector<double> vals;
    std::size_t last_row = m;
    std::size_t last_col = n;
    for (const auto& [i, j, v] : triples) {
        if (i == last_row && j == last_col) {
            vals.back() += v;  // duplicate (i, j)
            continue;
        }
        cols.push_back(j);
        vals.push_back(v);
        row_ptr[i + 1] = vals.size();
        last_row = i;
        last_col = j;
    }
    for (std::size_t i = 0; i < m; ++i) row_ptr[i + 1] = std::max(row_ptr[i + 1], row_ptr[i]);
    return Matrix::csr(m, n, std::move(row_ptr), std::move(cols), std::move(vals));
}

inline Matrix read_matrix_market_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return read_matrix_market(in);
}

/// Loads A and synthesizes a consistent right-hand side b = A x_ref.
///
/// Within the dense SVD limit, x_ref is a Gaussian vector projected onto Range(A^T)
/// and is therefore A^+ b. Above it, A must have full column rank (checked by a
/// column-pivoted QR) and the Gaussian vector is used as is.
inline LinearSystem load_matrix_market(const std::string& path, std::uint64_t seed) {
    LinearSystem sys;
    sys.A = read_matrix_market_file(path);
    Rng rng(seed, stream::kProblem);
    Vector xs(sys.A.cols());
    rng.fill_normal(xs);
    if (sys.A.rows() * sys.A.cols() <= kDenseSvdLimit) {
        const auto V = row_space_basis(sys.A);
        const Eigen::Map<const Eigen::VectorXd> xv(xs.data(), static_cast<Eigen::Index>(xs.size()));
        const Eigen::VectorXd xref = V * (V.transpose() * xv);
        sys.reference_solution = Vector(xref.data(), xref.data() + xref.size());
    } else {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sys.A.to_eigen());
        if (static_cast<std::size_t>(qr.rank()) != sys.A.cols()) {
            throw ConfigError("matrix exceeds the dense SVD limit and is not of full column rank");
        }
        sys.reference_solution = xs;
    }
    sys.b = matvec(sys.A, *sys.reference_solution);
    return sys;
}

}  // namespace rimk
