#pragma once

// Brute-force verifiers for tests. Dense, small, and deliberately slow; every
// entry point carries a size guard so production paths cannot reach them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rimk/errors.hpp"
#include "rimk/linalg.hpp"

namespace rimk::oracle {

inline constexpr std::size_t kMaxHullWidth = 64;
inline constexpr std::size_t kMaxKrylovPower = 8;

struct AffineHull {
    Vector anchor;
    std::vector<Vector> directions;  // need not be independent
};

/// aff{p_0, p_1, ...} as anchor p_0 with directions p_i - p_0.
inline AffineHull hull_of_points(std::span<const Vector> points) {
    if (points.empty()) throw UsageError("hull_of_points: need at least one point");
    AffineHull h{points.front(), {}};
    for (std::size_t i = 1; i < points.size(); ++i) h.directions.push_back(difference(points[i], points.front()));
    return h;
}

inline Eigen::MatrixXd columns_to_eigen(std::span<const Vector> cols, std::size_t rows) {
    Eigen::MatrixXd M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
        if (cols[j].size() != rows) throw UsageError("oracle: column length mismatch");
        for (std::size_t i = 0; i < rows; ++i) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cols[j][i];
    }
    return M;
}

/// argmin over the hull of ||x - target||_2, by SVD least squares on the directions.
inline Vector project_affine(const AffineHull& hull, std::span<const double> target) {
    if (hull.directions.size() > kMaxHullWidth) {
        throw CapacityExceeded("project_affine: hull width " + std::to_string(hull.directions.size()) +
                               " exceeds oracle guard");
    }
    const std::size_t n = hull.anchor.size();
    if (target.size() != n) throw UsageError("project_affine: target length mismatch");
    Vector out = hull.anchor;
    if (hull.directions.empty()) return out;
    const auto svd = truncated_svd(columns_to_eigen(hull.directions, n));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) rhs(static_cast<Eigen::Index>(i)) = target[i] - hull.anchor[i];
    // U U^T (target - anchor) is the projection onto the direction span.
    const Eigen::VectorXd step = svd.U * (svd.U.transpose() * rhs);
    for (std::size_t i = 0; i < n; ++i) out[i] += step(static_cast<Eigen::Index>(i));
    return out;
}

/// C(alpha) entry by entry: tridiagonal with C_11 = 1/a_1, C_ii = 1/a_{i-1} + 1/a_i,
/// C_{i,i+1} = C_{i+1,i} = -1/a_i.
inline SquareMatrix explicit_c_matrix(std::span<const double> alpha) {
    const std::size_t n = alpha.size();
    if (n > kMaxHullWidth) throw CapacityExceeded("explicit_c_matrix: size exceeds oracle guard");
    for (const double a : alpha) {
        if (!(a > 0.0)) throw UsageError("explicit_c_matrix: scalars must be positive");
    }
    SquareMatrix C(n);
    for (std::size_t i = 0; i < n; ++i) C(i, i) = i == 0 ? 1.0 / alpha[0] : 1.0 / alpha[i - 1] + 1.0 / alpha[i];
    for (std::size_t i = 0; i + 1 < n; ++i) {
        C(i, i + 1) = -1.0 / alpha[i];
        C(i + 1, i) = -1.0 / alpha[i];
    }
    return C;
}

/// B = sum_j alpha_j 1_j 1_j^T with 1_j the indicator of the first j coordinates,
/// i.e. B_ij = sum_{t >= max(i,j)} alpha_t.
inline SquareMatrix rank_one_sum(std::span<const double> alpha) {
    const std::size_t n = alpha.size();
    SquareMatrix B(n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t r = 0; r <= j; ++r) {
            for (std::size_t c = 0; c <= j; ++c) B(r, c) += alpha[j];
        }
    }
    return B;
}

inline SquareMatrix multiply(const SquareMatrix& X, const SquareMatrix& Y) {
    SquareMatrix Z(X.n);
    for (std::size_t i = 0; i < X.n; ++i) {
        for (std::size_t k = 0; k < X.n; ++k) {
            for (std::size_t j = 0; j < X.n; ++j) Z(i, j) += X(i, k) * Y(k, j);
        }
    }
    return Z;
}

inline double distance_from_identity(const SquareMatrix& X) {
    double worst = 0.0;
    for (std::size_t i = 0; i < X.n; ++i) {
        for (std::size_t j = 0; j < X.n; ++j) worst = std::max(worst, std::abs(X(i, j) - (i == j ? 1.0 : 0.0)));
    }
    return worst;
}

/// ||C(alpha) B - I||_max.
inline double c_matrix_residual(std::span<const double> alpha) {
    return distance_from_identity(multiply(explicit_c_matrix(alpha), rank_one_sum(alpha)));
}

/// Gram matrix of a column list.
inline SquareMatrix gram(std::span<const Vector> cols) {
    SquareMatrix G(cols.size());
    for (std::size_t i = 0; i < cols.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) G(i, j) = dot(cols[i], cols[j]);
    }
    return G;
}

/// {A^T r0, (A^T A) A^T r0, ..., (A^T A)^k A^T r0}
inline std::vector<Vector> krylov_basis(const Matrix& A, std::span<const double> r0, std::size_t k) {
    if (k > std::min({A.rows(), A.cols(), kMaxKrylovPower})) {
        throw CapacityExceeded("krylov_basis: k exceeds min(m, n, 8)");
    }
    std::vector<Vector> out;
    out.push_back(transpose_matvec(A, r0));
    for (std::size_t i = 0; i < k; ++i) out.push_back(transpose_matvec(A, matvec(A, out.back())));
    return out;
}

/// max_i ||(I - Q Q^T) v_i|| / ||v_i|| where Q spans `onto` (columns normalized before the SVD).
inline double subspace_residual(std::span<const Vector> of, std::span<const Vector> onto) {
    if (of.empty()) return 0.0;
    const std::size_t n = of.front().size();
    std::vector<Vector> normalized;
    for (const auto& v : onto) {
        const double s = norm2(v);
        Vector u = v;
        if (s > 0.0) {
            for (auto& t : u) t /= s;
        }
        normalized.push_back(std::move(u));
    }
    const auto Q = truncated_svd(columns_to_eigen(normalized, n)).U;
    double worst = 0.0;
    for (const auto& v : of) {
        const Eigen::Map<const Eigen::VectorXd> vv(v.data(), static_cast<Eigen::Index>(n));
        const double nv = vv.norm();
        if (nv == 0.0) continue;
        worst = std::max(worst, (vv - Q * (Q.transpose() * vv)).norm() / nv);
    }
    return worst;
}

}  // namespace rimk::oracle
