#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "rimk/errors.hpp"
#include "rimk/linalg.hpp"
#include "rimk/random.hpp"

namespace rimk {

struct SyntheticSpec {
    std::size_t m = 0;
    std::size_t n = 0;
    std::size_t rank = 0;
    double kappa = 1.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (m == 0 || n == 0) throw UsageError("synthetic: m and n must be positive");
        if (rank == 0 || rank > std::min(m, n)) throw UsageError("synthetic: rank must satisfy 1 <= r <= min(m, n)");
        if (!(kappa >= 1.0)) throw UsageError("synthetic: kappa must be at least 1");
    }
};

namespace detail {

// Orthonormal Q from the thin QR of a rows x cols standard Gaussian matrix (filled row by row).
inline Eigen::MatrixXd gaussian_orthonormal(std::size_t rows, std::size_t cols, Rng& rng) {
    Eigen::MatrixXd G(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < G.rows(); ++i) {
        for (Eigen::Index j = 0; j < G.cols(); ++j) G(i, j) = rng.normal();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
    return qr.householderQ() * Eigen::MatrixXd::Identity(G.rows(), G.cols());
}

}  // namespace detail

/// A = U D V^T with Gaussian-QR factors and D = diag(1 + (kappa-1) u), u ~ U(0,1) sorted
/// descending. The reference solution is a Gaussian vector projected onto Range(V), so it
/// is exactly A^+ b for b = A x_ref.
inline LinearSystem generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(spec.seed, stream::kProblem);
    const Eigen::MatrixXd U = detail::gaussian_orthonormal(spec.m, spec.rank, rng);
    const Eigen::MatrixXd V = detail::gaussian_orthonormal(spec.n, spec.rank, rng);
    std::vector<double> diag(spec.rank);
    for (auto& v : diag) v = 1.0 + (spec.kappa - 1.0) * rng.uniform01();
    std::sort(diag.begin(), diag.end(), std::greater<>());
    const Eigen::Map<const Eigen::VectorXd> D(diag.data(), static_cast<Eigen::Index>(diag.size()));
    const Eigen::MatrixXd A = U * D.asDiagonal() * V.transpose();

    Eigen::VectorXd xs(static_cast<Eigen::Index>(spec.n));
    for (Eigen::Index i = 0; i < xs.size(); ++i) xs(i) = rng.normal();
    const Eigen::VectorXd xref = V * (V.transpose() * xs);

    LinearSystem sys;
    sys.A = Matrix::from_eigen(A);
    sys.reference_solution = Vector(xref.data(), xref.data() + xref.size());
    sys.b = matvec(sys.A, *sys.reference_solution);
    return sys;
}

}  // namespace rimk
