#pragma once

// Dense/CSR matrix storage and the kernels the solvers share.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "rimk/errors.hpp"

namespace rimk {

using Vector = std::vector<double>;

// ---------------------------------------------------------------------------
// small vector helpers
// ---------------------------------------------------------------------------

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_norm(std::span<const double> a) noexcept { return dot(a, a); }

inline double norm2(std::span<const double> a) noexcept { return std::sqrt(squared_norm(a)); }

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline Vector difference(std::span<const double> a, std::span<const double> b) {
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

inline double distance(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double t = a[i] - b[i];
        s += t * t;
    }
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Matrix
// ---------------------------------------------------------------------------

struct DenseStorage {
    std::vector<double> values;  // row-major, rows*cols entries
};

struct CsrStorage {
    std::vector<std::size_t> row_ptr;  // rows+1 entries
    std::vector<std::size_t> col_idx;
    std::vector<double> values;
};

/// Immutable m x n real matrix, dense row-major or compressed sparse row.
class Matrix {
public:
    Matrix() = default;

    static Matrix dense(std::size_t rows, std::size_t cols, std::vector<double> row_major) {
        if (row_major.size() != rows * cols) {
            throw UsageError("dense matrix needs " + std::to_string(rows * cols) + " values, got " +
                             std::to_string(row_major.size()));
        }
        return Matrix(rows, cols, DenseStorage{std::move(row_major)});
    }

    static Matrix zeros(std::size_t rows, std::size_t cols) {
        return dense(rows, cols, std::vector<double>(rows * cols, 0.0));
    }

    static Matrix identity(std::size_t n) {
        auto m = std::vector<double>(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) m[i * n + i] = 1.0;
        return dense(n, n, std::move(m));
    }

    /// Validates the CSR invariants.
    static Matrix csr(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                      std::vector<std::size_t> col_idx, std::vector<double> values) {
        if (row_ptr.size() != rows + 1 || row_ptr.front() != 0) {
            throw UsageError("CSR row pointer must have rows+1 entries starting at 0");
        }
        if (col_idx.size() != values.size() || row_ptr.back() != values.size()) {
            throw UsageError("CSR final row pointer must equal nnz");
        }
        for (std::size_t i = 0; i < rows; ++i) {
            if (row_ptr[i + 1] < row_ptr[i]) throw UsageError("CSR row pointers must be nondecreasing");
            for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
                if (col_idx[p] >= cols) throw UsageError("CSR column index out of range");
                if (p > row_ptr[i] && col_idx[p] <= col_idx[p - 1]) {
                    throw UsageError("CSR column indices must be strictly increasing within a row");
                }
            }
        }
        return Matrix(rows, cols, CsrStorage{std::move(row_ptr), std::move(col_idx), std::move(values)});
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] bool is_dense() const noexcept { return std::holds_alternative<DenseStorage>(storage_); }
    [[nodiscard]] bool is_sparse() const noexcept { return !is_dense(); }
    [[nodiscard]] const DenseStorage& dense_storage() const { return std::get<DenseStorage>(storage_); }
    [[nodiscard]] const CsrStorage& csr_storage() const { return std::get<CsrStorage>(storage_); }

    [[nodiscard]] std::size_t nnz() const {
        return is_dense() ? rows_ * cols_ : csr_storage().values.size();
    }

    /// Calls f(col, value) for each stored entry of row i.
    template <class F>
    void for_each_in_row(std::size_t i, F&& f) const {
        if (const auto* d = std::get_if<DenseStorage>(&storage_)) {
            const double* row = d->values.data() + i * cols_;
            for (std::size_t j = 0; j < cols_; ++j) f(j, row[j]);
        } else {
            const auto& s = std::get<CsrStorage>(storage_);
            for (std::size_t p = s.row_ptr[i]; p < s.row_ptr[i + 1]; ++p) f(s.col_idx[p], s.values[p]);
        }
    }

    [[nodiscard]] double row_dot(std::size_t i, std::span<const double> x) const {
        if (const auto* d = std::get_if<DenseStorage>(&storage_)) {
            return dot(std::span<const double>(d->values.data() + i * cols_, cols_), x);
        }
        double s = 0.0;
        for_each_in_row(i, [&](std::size_t j, double v) { s += v * x[j]; });
        return s;
    }

    /// y += alpha * row_i
    void add_row_to(std::size_t i, double alpha, std::span<double> y) const {
        if (const auto* d = std::get_if<DenseStorage>(&storage_)) {
            axpy(alpha, std::span<const double>(d->values.data() + i * cols_, cols_), y);
            return;
        }
        for_each_in_row(i, [&](std::size_t j, double v) { y[j] += alpha * v; });
    }

    [[nodiscard]] double row_squared_norm(std::size_t i) const {
        double s = 0.0;
        for_each_in_row(i, [&](std::size_t, double v) { s += v * v; });
        return s;
    }

    [[nodiscard]] double at(std::size_t i, std::size_t j) const {
        if (const auto* d = std::get_if<DenseStorage>(&storage_)) return d->values[i * cols_ + j];
        const auto& s = std::get<CsrStorage>(storage_);
        const auto first = s.col_idx.begin() + static_cast<std::ptrdiff_t>(s.row_ptr[i]);
        const auto last = s.col_idx.begin() + static_cast<std::ptrdiff_t>(s.row_ptr[i + 1]);
        const auto it = std::lower_bound(first, last, j);
        return (it != last && *it == j) ? s.values[static_cast<std::size_t>(it - s.col_idx.begin())] : 0.0;
    }

    /// Submatrix made of the listed rows, in the listed order, with the same storage tag.
    [[nodiscard]] Matrix select_rows(std::span<const std::size_t> indices) const {
        if (const auto* d = std::get_if<DenseStorage>(&storage_)) {
            std::vector<double> out(indices.size() * cols_);
            for (std::size_t r = 0; r < indices.size(); ++r) {
                std::copy_n(d->values.begin() + static_cast<std::ptrdiff_t>(indices[r] * cols_), cols_,
                            out.begin() + static_cast<std::ptrdiff_t>(r * cols_));
            }
            return Matrix(indices.size(), cols_, DenseStorage{std::move(out)});
        }
        const auto& s = std::get<CsrStorage>(storage_);
        CsrStorage out;
        out.row_ptr.reserve(indices.size() + 1);
        out.row_ptr.push_back(0);
        for (const auto i : indices) {
            for (std::size_t p = s.row_ptr[i]; p < s.row_ptr[i + 1]; ++p) {
                out.col_idx.push_back(s.col_idx[p]);
                out.values.push_back(s.values[p]);
            }
            out.row_ptr.push_back(out.values.size());
        }
        return Matrix(indices.size(), cols_, std::move(out));
    }

    [[nodiscard]] Matrix to_dense() const {
        if (is_dense()) return *this;
        std::vector<double> out(rows_ * cols_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            for_each_in_row(i, [&](std::size_t j, double v) { out[i * cols_ + j] = v; });
        }
        return Matrix(rows_, cols_, DenseStorage{std::move(out)});
    }

    /// Drops explicit zeros.
    [[nodiscard]] Matrix to_csr() const {
        CsrStorage out;
        out.row_ptr.push_back(0);
        for (std::size_t i = 0; i < rows_; ++i) {
            for_each_in_row(i, [&](std::size_t j, double v) {
                if (v != 0.0) {
                    out.col_idx.push_back(j);
                    out.values.push_back(v);
                }
            });
            out.row_ptr.push_back(out.values.size());
        }
        return Matrix(rows_, cols_, std::move(out));
    }

    [[nodiscard]] Eigen::MatrixXd to_eigen() const {
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
        for (std::size_t i = 0; i < rows_; ++i) {
            for_each_in_row(i, [&](std::size_t j, double v) {
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            });
        }
        return out;
    }

    static Matrix from_eigen(const Eigen::MatrixXd& m) {
        std::vector<double> values(static_cast<std::size_t>(m.size()));
        const auto cols = static_cast<std::size_t>(m.cols());
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                values[static_cast<std::size_t>(i) * cols + static_cast<std::size_t>(j)] = m(i, j);
            }
        }
        return dense(static_cast<std::size_t>(m.rows()), cols, std::move(values));
    }

private:
    Matrix(std::size_t rows, std::size_t cols, std::variant<DenseStorage, CsrStorage> storage)
        : rows_(rows), cols_(cols), storage_(std::move(storage)) {}

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::variant<DenseStorage, CsrStorage> storage_{DenseStorage{}};
};

/// Coefficient matrix, right-hand side and, optionally, the min-norm solution.
struct LinearSystem {
    Matrix A;
    Vector b;
    std::optional<Vector> reference_solution;
};

// ---------------------------------------------------------------------------
// kernels
// ---------------------------------------------------------------------------

/// y = A x
inline void matvec(const Matrix& A, std::span<const double> x, std::span<double> y) {
    if (x.size() != A.cols() || y.size() != A.rows()) throw UsageError("matvec: dimension mismatch");
    for (std::size_t i = 0; i < A.rows(); ++i) y[i] = A.row_dot(i, x);
}

inline Vector matvec(const Matrix& A, std::span<const double> x) {
    Vector y(A.rows());
    matvec(A, x, y);
    return y;
}

/// x = A^T y, accumulated row by row; A^T is never formed.
inline void transpose_matvec(const Matrix& A, std::span<const double> y, std::span<double> x) {
    if (y.size() != A.rows() || x.size() != A.cols()) throw UsageError("transpose_matvec: dimension mismatch");
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t i = 0; i < A.rows(); ++i) {
        if (y[i] != 0.0) A.add_row_to(i, y[i], x);
    }
}

inline Vector transpose_matvec(const Matrix& A, std::span<const double> y) {
    Vector x(A.cols());
    transpose_matvec(A, y, x);
    return x;
}

/// r = A x - b
inline Vector residual(const Matrix& A, std::span<const double> x, std::span<const double> b) {
    auto r = matvec(A, x);
    if (b.size() != r.size()) throw UsageError("residual: right-hand side length mismatch");
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    return r;
}

inline double frobenius_squared(const Matrix& A) {
    double s = 0.0;
    for (std::size_t i = 0; i < A.rows(); ++i) s += A.row_squared_norm(i);
    return s;
}

/// Squared Frobenius norm of each row block. The blocks must partition [0, m).
inline Vector row_block_norms(const Matrix& A, std::span<const std::vector<std::size_t>> partition) {
    std::vector<char> seen(A.rows(), 0);
    std::size_t covered = 0;
    Vector out;
    out.reserve(partition.size());
    for (const auto& block : partition) {
        double s = 0.0;
        for (const auto i : block) {
            if (i >= A.rows()) throw UsageError("row_block_norms: row index out of range");
            if (seen[i] != 0) throw UsageError("row_block_norms: overlapping blocks");
            seen[i] = 1;
            ++covered;
            s += A.row_squared_norm(i);
        }
        out.push_back(s);
    }
    if (covered != A.rows()) throw UsageError("row_block_norms: blocks do not cover every row");
    return out;
}

/// Dense square matrix, row-major. Small systems only (Gram matrices, oracles).
struct SquareMatrix {
    std::size_t n = 0;
    std::vector<double> a;

    explicit SquareMatrix(std::size_t size = 0) : n(size), a(size * size, 0.0) {}
    double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

/// Solves G s = rhs for symmetric positive definite G by Cholesky.
/// Throws NumericalBreakdown with the pivot index on a non-positive pivot.
inline Vector solve_spd(const SquareMatrix& G, std::span<const double> rhs) {
    const std::size_t n = G.n;
    if (rhs.size() != n) throw UsageError("solve_spd: dimension mismatch");
    double max_abs = 0.0;
    for (const double v : G.a) max_abs = std::max(max_abs, std::abs(v));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::abs(G(i, j) - G(j, i)) > 1e-10 * max_abs) throw UsageError("solve_spd: matrix is not symmetric");
        }
    }
    // lower-triangular factor, row-major
    SquareMatrix L(n);
    for (std::size_t j = 0; j < n; ++j) {
        double diag = G(j, j);
        for (std::size_t k = 0; k < j; ++k) diag -= L(j, k) * L(j, k);
        if (!(diag > 0.0)) throw NumericalBreakdown("solve_spd: non-positive pivot", j);
        const double ljj = std::sqrt(diag);
        L(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = G(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            L(i, j) = s / ljj;
        }
    }
    Vector s(rhs.begin(), rhs.end());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) s[i] -= L(i, k) * s[k];
        s[i] /= L(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t k = i + 1; k < n; ++k) s[i] -= L(k, i) * s[k];
        s[i] /= L(i, i);
    }
    return s;
}

// ---------------------------------------------------------------------------
// dense SVD helpers (desk scale)
// ---------------------------------------------------------------------------

inline constexpr std::size_t kDenseSvdLimit = 4'000'000;  // m*n
inline constexpr double kSvdRelativeCutoff = 1e-12;

inline void check_dense_capacity(std::size_t rows, std::size_t cols, const char* who) {
    if (rows * cols > kDenseSvdLimit) {
        throw CapacityExceeded(std::string(who) + ": " + std::to_string(rows) + "x" + std::to_string(cols) +
                               " exceeds the dense SVD limit of " + std::to_string(kDenseSvdLimit) + " entries");
    }
}

/// Thin SVD factors with singular values below cutoff*sigma_max dropped.
struct TruncatedSvd {
    Eigen::MatrixXd U;
    Eigen::VectorXd sigma;
    Eigen::MatrixXd V;

    [[nodiscard]] Eigen::Index rank() const noexcept { return sigma.size(); }
};

inline TruncatedSvd truncated_svd(const Eigen::MatrixXd& M, double relative_cutoff = kSvdRelativeCutoff) {
    TruncatedSvd out;
    if (M.rows() == 0 || M.cols() == 0) {
        out.U.resize(M.rows(), 0);
        out.V.resize(M.cols(), 0);
        return out;
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const double smax = s.size() > 0 ? s(0) : 0.0;
    Eigen::Index r = 0;
    while (r < s.size() && s(r) > relative_cutoff * smax && s(r) > 0.0) ++r;
    out.U = svd.matrixU().leftCols(r);
    out.sigma = s.head(r);
    out.V = svd.matrixV().leftCols(r);
    return out;
}

/// A^+ b by dense SVD. Throws CapacityExceeded above the desk-scale guard.
inline Vector minnorm_solution(const Matrix& A, std::span<const double> b) {
    if (b.size() != A.rows()) throw UsageError("minnorm_solution: right-hand side length mismatch");
    check_dense_capacity(A.rows(), A.cols(), "minnorm_solution");
    const auto svd = truncated_svd(A.to_eigen());
    const Eigen::Map<const Eigen::VectorXd> bv(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::VectorXd coeff = svd.U.transpose() * bv;
    coeff.array() /= svd.sigma.array();
    const Eigen::VectorXd x = svd.V * coeff;
    return Vector(x.data(), x.data() + x.size());
}

/// Orthonormal basis of Range(A^T) (right singular subspace), desk scale only.
inline Eigen::MatrixXd row_space_basis(const Matrix& A) {
    check_dense_capacity(A.rows(), A.cols(), "row_space_basis");
    return truncated_svd(A.to_eigen()).V;
}

/// ||(I - V V^T) x||_2 for orthonormal V.
inline double distance_from_span(const Eigen::MatrixXd& V, std::span<const double> x) {
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    return (xv - V * (V.transpose() * xv)).norm();
}

}  // namespace rimk
