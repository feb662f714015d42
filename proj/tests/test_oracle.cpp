#include <gtest/gtest.h>

#include "rimk/oracle.hpp"
#include "test_util.hpp"

using namespace rimk;
using rimk::testing::lockstep;

TEST(ProjectAffine, PointHull) {
    const std::vector<Vector> pts{{1, 2, 3}};
    EXPECT_EQ(oracle::project_affine(oracle::hull_of_points(pts), Vector{9, 9, 9}), (Vector{1, 2, 3}));
}

TEST(ProjectAffine, CoordinateLine) {
    const std::vector<Vector> pts{{0, 0}, {1, 0}};
    const auto p = oracle::project_affine(oracle::hull_of_points(pts), Vector{3, 4});
    EXPECT_NEAR(p[0], 3.0, 1e-14);
    EXPECT_NEAR(p[1], 0.0, 1e-14);
}

TEST(ProjectAffine, FullSpaceIsIdentity) {
    const std::vector<Vector> pts{{1, 1}, {2, 1}, {1, 3}};
    const auto p = oracle::project_affine(oracle::hull_of_points(pts), Vector{-5, 7});
    EXPECT_NEAR(p[0], -5.0, 1e-13);
    EXPECT_NEAR(p[1], 7.0, 1e-13);
}

TEST(ProjectAffine, ResidualOrthogonalToDirections) {
    const auto pts = std::vector<Vector>{rimk::testing::random_vector(8, 1), rimk::testing::random_vector(8, 2),
                                         rimk::testing::random_vector(8, 3)};
    const auto hull = oracle::hull_of_points(pts);
    const auto t = rimk::testing::random_vector(8, 4);
    const auto p = oracle::project_affine(hull, t);
    const auto r = difference(t, p);
    for (const auto& d : hull.directions) EXPECT_NEAR(dot(r, d), 0.0, 1e-12);
}

TEST(ProjectAffine, Guard) {
    oracle::AffineHull h{Vector(2, 0.0), std::vector<Vector>(oracle::kMaxHullWidth + 1, Vector(2, 1.0))};
    EXPECT_THROW(oracle::project_affine(h, Vector(2, 0.0)), CapacityExceeded);
}

TEST(ExplicitCMatrix, Examples) {
    const auto c1 = oracle::explicit_c_matrix(Vector{1});
    EXPECT_EQ(c1(0, 0), 1.0);
    const auto c = oracle::explicit_c_matrix(Vector{1, 2});
    EXPECT_EQ(c(0, 0), 1.0);
    EXPECT_EQ(c(0, 1), -1.0);
    EXPECT_EQ(c(1, 0), -1.0);
    EXPECT_EQ(c(1, 1), 1.5);
    const auto B = oracle::rank_one_sum(Vector{1, 2});
    EXPECT_EQ(B(0, 0), 3.0);
    EXPECT_EQ(B(0, 1), 2.0);
    EXPECT_EQ(B(1, 0), 2.0);
    EXPECT_EQ(B(1, 1), 2.0);
    EXPECT_EQ(oracle::c_matrix_residual(Vector{1, 2}), 0.0);
    EXPECT_THROW(oracle::explicit_c_matrix(Vector{1, -1}), UsageError);
}

TEST(ExplicitCMatrix, InvertsRankOneSum) {
    Rng rng(5);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 1 + rng.below(10);
        Vector alpha(n);
        for (auto& a : alpha) a = 0.05 + rng.uniform01();
        EXPECT_LE(oracle::c_matrix_residual(alpha), 1e-8);
    }
}

TEST(KrylovBasis, Examples) {
    const auto A = Matrix::identity(3);
    const Vector v{1, 2, 3};
    const auto k0 = oracle::krylov_basis(A, v, 0);
    ASSERT_EQ(k0.size(), 1u);
    EXPECT_EQ(k0[0], v);
    for (const auto& u : oracle::krylov_basis(A, v, 2)) EXPECT_EQ(u, v);
    EXPECT_THROW(oracle::krylov_basis(A, v, 4), CapacityExceeded);
}

TEST(SubspaceResidual, DetectsSpanEquality) {
    const std::vector<Vector> a{{1, 0, 0}, {0, 1, 0}};
    const std::vector<Vector> b{{1, 1, 0}, {1, -1, 0}};
    const std::vector<Vector> c{{1, 0, 0}, {0, 0, 1}};
    EXPECT_LE(oracle::subspace_residual(a, b), 1e-14);
    EXPECT_LE(oracle::subspace_residual(b, a), 1e-14);
    EXPECT_NEAR(oracle::subspace_residual(a, c), 1.0, 1e-14);
}

TEST(KrylovBasis, SpanEqualsWindowDirections) {
    const auto sys = rimk::testing::gaussian_system(10, 6, 3);
    Rng frng(0, stream::kFamily);
    const auto f = SketchFamily::partition(sys.A, 10, frng);
    KrylovSolver kr(Vector(6, 0.0), 6);
    const auto r0 = residual(sys.A, Vector(6, 0.0), sys.b);
    std::vector<Vector> dirs;
    lockstep(f, sys, Rng(1), 5, [&](std::size_t k) {
        dirs.push_back(kr.last_direction());
        const auto K = oracle::krylov_basis(sys.A, r0, k);
        EXPECT_LE(oracle::subspace_residual(dirs, K), 1e-8) << "k " << k;
        EXPECT_LE(oracle::subspace_residual(K, dirs), 1e-8) << "k " << k;
    }, kr);
}
