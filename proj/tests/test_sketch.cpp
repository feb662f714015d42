#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <set>

#include "test_util.hpp"

using namespace rimk;
using rimk::testing::gaussian_matrix;
using rimk::testing::gaussian_system;
using rimk::testing::random_vector;

namespace {

// Explicit m x q sketch matrix for a sample, built column by column from unit vectors.
std::vector<Vector> explicit_sketch_columns(const SketchFamily& f, const SketchSample& s) {
    const std::size_t q = f.output_size(s);
    std::vector<Vector> cols;
    for (std::size_t j = 0; j < q; ++j) {
        Vector e(q, 0.0);
        e[j] = 1.0;
        cols.push_back(f.apply(s, e));
    }
    return cols;
}

// Explicit Sylvester Hadamard matrix of size n (power of two).
std::vector<Vector> hadamard(std::size_t n) {
    std::vector<Vector> H(n, Vector(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) H[i][j] = (std::popcount(i & j) % 2 == 0) ? 1.0 : -1.0;
    }
    return H;
}

}  // namespace

TEST(Partition, BlockSizes) {
    Rng rng(1, stream::kFamily);
    const auto f4 = SketchFamily::partition(Matrix::identity(4), 2, rng);
    ASSERT_EQ(f4.blocks().size(), 2u);
    EXPECT_EQ(f4.blocks()[0].size(), 2u);
    EXPECT_EQ(f4.blocks()[1].size(), 2u);

    const auto f5 = SketchFamily::partition(Matrix::identity(5), 2, rng);
    ASSERT_EQ(f5.blocks().size(), 3u);
    EXPECT_EQ(f5.blocks()[0].size(), 2u);
    EXPECT_EQ(f5.blocks()[1].size(), 2u);
    EXPECT_EQ(f5.blocks()[2].size(), 1u);
}

TEST(Partition, BlocksDisjointAndCovering) {
    Rng rng(2, stream::kFamily);
    const auto f = SketchFamily::partition(gaussian_matrix(37, 5, 2), 6, rng);
    std::set<std::size_t> seen;
    for (const auto& b : f.blocks()) {
        EXPECT_LE(b.size(), 6u);
        for (const auto i : b) EXPECT_TRUE(seen.insert(i).second);
    }
    EXPECT_EQ(seen.size(), 37u);
    double total = 0.0;
    for (const double w : f.weights()) total += w;
    EXPECT_NEAR(total, 1.0, 1e-14);
}

TEST(Partition, WeightsFromFrobeniusMass) {
    // Row squared norms (1, 0, 3).
    const auto A = Matrix::dense(3, 2, {1, 0, 0, 0, 1, std::sqrt(2.0)});
    const std::vector<std::size_t> order{0, 1, 2};
    const auto f = SketchFamily::partition_with_order(A, 1, order);
    ASSERT_EQ(f.weights().size(), 3u);
    EXPECT_NEAR(f.weights()[0], 0.25, 1e-15);
    EXPECT_EQ(f.weights()[1], 0.0);
    EXPECT_NEAR(f.weights()[2], 0.75, 1e-15);
    Rng rng(3);
    for (int i = 0; i < 500; ++i) EXPECT_NE(f.sample(rng).block, 1u);
}

TEST(Partition, SamplingFrequencyMatchesWeights) {
    const auto A = Matrix::dense(3, 2, {1, 0, 0, 0, 1, std::sqrt(2.0)});
    const std::vector<std::size_t> order{0, 1, 2};
    const auto f = SketchFamily::partition_with_order(A, 1, order);
    Rng rng(4);
    int hits0 = 0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) hits0 += f.sample(rng).block == 0 ? 1 : 0;
    EXPECT_NEAR(static_cast<double>(hits0) / n, 0.25, 0.01);
}

TEST(Sketch, RejectsBadSize) {
    Rng rng(1);
    const auto A = Matrix::identity(3);
    EXPECT_THROW(SketchFamily::partition(A, 4, rng), UsageError);
    EXPECT_THROW(SketchFamily::gaussian(A, 0), UsageError);
    EXPECT_THROW(SketchFamily::srht(A, 5), UsageError);
}

TEST(Draw, SingleRowArithmetic) {
    const auto A = Matrix::identity(2);
    const Vector b{1, 0};
    const std::vector<std::size_t> order{0, 1};
    const auto f = SketchFamily::partition_with_order(A, 1, order);
    SketchSample s;
    s.block = 0;
    const auto d = f.evaluate(s, A, b, Vector{0, 0});
    EXPECT_EQ(d.sketched_residual, (Vector{-1}));
    EXPECT_EQ(d.gamma, 1.0);
    EXPECT_EQ(d.direction, (Vector{1, 0}));
}

TEST(Draw, SolvedSystemIsConverged) {
    const auto sys = gaussian_system(20, 8, 1);
    const auto& x = *sys.reference_solution;
    Rng frng(1, stream::kFamily);
    for (const auto kind : {SketchKind::Partition, SketchKind::CountSketch, SketchKind::Gaussian, SketchKind::SRHT}) {
        const auto f = SketchFamily::make(kind, sys.A, 4, frng);
        Rng rng(2);
        EXPECT_FALSE(f.draw(sys.A, sys.b, x, rng).has_value()) << to_string(kind);
    }
}

TEST(Draw, GaussianAcceptsFirstDraw) {
    const auto sys = gaussian_system(20, 8, 2);
    const auto f = SketchFamily::gaussian(sys.A, 3);
    Rng rng(3);
    const auto before = rng.position();
    const auto d = f.draw(sys.A, sys.b, Vector(8, 0.0), rng);
    ASSERT_TRUE(d.has_value());
    EXPECT_GT(d->gamma, 0.0);
    EXPECT_EQ(d->sample.stream_position, before);
}

TEST(Draw, GammaIsSquaredNormAndDirectionMatchesExplicit) {
    const auto sys = gaussian_system(16, 6, 5);
    const auto x = random_vector(6, 5);
    const auto r = residual(sys.A, x, sys.b);
    Rng frng(5, stream::kFamily);
    for (const auto kind : {SketchKind::Partition, SketchKind::CountSketch, SketchKind::Gaussian, SketchKind::SRHT}) {
        const auto f = SketchFamily::make(kind, sys.A, 4, frng);
        Rng rng(6);
        for (int t = 0; t < 20; ++t) {
            const auto d = f.draw(sys.A, sys.b, x, rng);
            ASSERT_TRUE(d.has_value());
            EXPECT_NEAR(d->gamma, squared_norm(d->sketched_residual), 1e-14 * d->gamma);
            // Oracle: explicit S, then -A^T S S^T r.
            const auto cols = explicit_sketch_columns(f, d->sample);
            Vector str(cols.size());
            for (std::size_t j = 0; j < cols.size(); ++j) str[j] = dot(cols[j], r);
            Vector sstr(16, 0.0);
            for (std::size_t j = 0; j < cols.size(); ++j) axpy(str[j], cols[j], sstr);
            auto expect = transpose_matvec(sys.A, sstr);
            for (auto& v : expect) v = -v;
            EXPECT_LE(rimk::testing::relative_difference(str, d->sketched_residual), 1e-12) << to_string(kind);
            EXPECT_LE(rimk::testing::relative_difference(d->direction, expect), 1e-12) << to_string(kind);
        }
    }
}

TEST(Draw, PartitionExhaustionWithZeroBlocks) {
    // Only the first row carries mass; once it is solved every live block is zero.
    const auto A = Matrix::dense(4, 2, {1, 1, 0, 0, 0, 0, 0, 0});
    const Vector b{2, 0, 0, 0};
    Rng frng(0, stream::kFamily);
    const auto f = SketchFamily::partition(A, 1, frng);
    Rng rng(1);
    EXPECT_FALSE(f.draw(A, b, Vector{1, 1}, rng).has_value());
    EXPECT_TRUE(f.draw(A, b, Vector{0, 0}, rng).has_value());
}

TEST(Draw, PartitionFindsTheOnlyNonzeroBlock) {
    // Many blocks, only one with a nonzero residual: the sweep must find it.
    const std::size_t m = 64;
    std::vector<double> v(m * 2, 0.0);
    for (std::size_t i = 0; i < m; ++i) v[2 * i] = 1.0;
    const auto A = Matrix::dense(m, 2, v);
    Vector b(m, 0.0);
    b[17] = 1.0;
    Rng frng(4, stream::kFamily);
    const auto f = SketchFamily::partition(A, 1, frng);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        const auto d = f.draw(A, b, Vector{0, 0}, rng);
        ASSERT_TRUE(d.has_value());
        EXPECT_EQ(f.blocks()[d->sample.block][0], 17u);
    }
}

TEST(CountSketch, SignsCancelInGamma) {
    const auto sys = gaussian_system(10, 4, 7);
    const auto x = random_vector(4, 7);
    const auto f = SketchFamily::count_sketch(sys.A, 1);
    SketchSample plus;
    plus.kind = SketchKind::CountSketch;
    plus.indices = {0};
    plus.signs = {1.0};
    SketchSample minus = plus;
    minus.signs = {-1.0};
    const auto a = f.evaluate(plus, sys.A, sys.b, x);
    const auto c = f.evaluate(minus, sys.A, sys.b, x);
    EXPECT_EQ(a.sketched_residual[0], -c.sketched_residual[0]);
    EXPECT_EQ(a.gamma, c.gamma);
}

TEST(CountSketch, DirectionIndependentOfSigns) {
    const auto sys = gaussian_system(4, 3, 8);
    const auto x = random_vector(3, 8);
    const auto f = SketchFamily::count_sketch(sys.A, 2);
    SketchSample s;
    s.kind = SketchKind::CountSketch;
    s.indices = {0, 2};
    s.signs = {1.0, 1.0};
    const auto base = f.evaluate(s, sys.A, sys.b, x);
    for (const auto& signs : {Vector{-1, 1}, Vector{1, -1}, Vector{-1, -1}}) {
        s.signs = signs;
        const auto d = f.evaluate(s, sys.A, sys.b, x);
        EXPECT_LE(distance(d.direction, base.direction), 1e-14 * norm2(base.direction));
    }
}

TEST(CountSketch, FullSketchIsFullResidual) {
    const auto sys = gaussian_system(6, 3, 9);
    const auto x = random_vector(3, 9);
    const auto f = SketchFamily::count_sketch(sys.A, 6, false);
    Rng rng(1);
    auto s = f.sample(rng);
    EXPECT_EQ(s.indices, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5}));
    const auto d = f.evaluate(s, sys.A, sys.b, x);
    const double rr = squared_norm(residual(sys.A, x, sys.b));
    EXPECT_NEAR(d.gamma, rr, 1e-13 * rr);
}

TEST(CountSketch, UnsignedSharesIndexStream) {
    const auto A = Matrix::identity(12);
    const auto signed_f = SketchFamily::count_sketch(A, 4, true);
    const auto plain_f = SketchFamily::count_sketch(A, 4, false);
    Rng a(3);
    Rng b(3);
    for (int i = 0; i < 50; ++i) {
        const auto sa = signed_f.sample(a);
        const auto sb = plain_f.sample(b);
        EXPECT_EQ(sa.indices, sb.indices);
        for (const double v : sb.signs) EXPECT_EQ(v, 1.0);
    }
}

TEST(Fwht, MatchesExplicitHadamard) {
    for (const std::size_t n : {1u, 2u, 4u, 8u, 32u}) {
        const auto v = random_vector(n, n);
        Vector fast = v;
        fwht(fast);
        const auto H = hadamard(n);
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(fast[i], dot(H[i], v), 1e-12);
    }
}

TEST(Srht, TwoByTwoExamples) {
    const auto f = SketchFamily::srht(Matrix::identity(2), 1);
    SketchSample s;
    s.kind = SketchKind::SRHT;
    s.signs = {1.0, 1.0};
    s.indices = {0};
    EXPECT_NEAR(f.srht_apply(s, Vector{1, 1})[0], 2.0 * std::sqrt(2.0), 1e-15);
    s.signs = {1.0, -1.0};
    s.indices = {1};
    EXPECT_NEAR(f.srht_apply(s, Vector{1, 1})[0], 2.0 * std::sqrt(2.0), 1e-15);
    EXPECT_EQ(f.srht_apply(s, Vector{0, 0})[0], 0.0);
}

TEST(Srht, FastMatchesExplicitWithPadding) {
    // m = 6 pads to 8; explicit sqrt(m/q) (H D)_J on the padded space restricted to the first m columns.
    const std::size_t m = 6;
    const std::size_t q = 3;
    const auto f = SketchFamily::srht(gaussian_matrix(m, 2, 1), q);
    ASSERT_EQ(f.padded_rows(), 8u);
    const auto H = hadamard(8);
    Rng rng(2);
    for (int t = 0; t < 50; ++t) {
        const auto s = f.sample(rng);
        const auto v = random_vector(m, static_cast<std::uint64_t>(t));
        const auto fast = f.srht_apply(s, v);
        for (std::size_t i = 0; i < q; ++i) {
            double e = 0.0;
            for (std::size_t j = 0; j < m; ++j) e += H[s.indices[i]][j] * s.signs[j] * v[j];
            EXPECT_NEAR(fast[i], std::sqrt(2.0) * e, 1e-12);
        }
    }
}

TEST(Sketch, ApplyIsAdjointOfApplyTranspose) {
    const auto A = gaussian_matrix(13, 3, 4);
    Rng frng(4, stream::kFamily);
    for (const auto kind : {SketchKind::Partition, SketchKind::CountSketch, SketchKind::Gaussian, SketchKind::SRHT}) {
        const auto f = SketchFamily::make(kind, A, 5, frng);
        Rng rng(5);
        for (int t = 0; t < 10; ++t) {
            const auto s = f.sample(rng);
            const auto v = random_vector(13, static_cast<std::uint64_t>(t), 1);
            const auto u = random_vector(f.output_size(s), static_cast<std::uint64_t>(t), 2);
            const double lhs = dot(f.apply_transpose(s, v), u);
            const double rhs = dot(v, f.apply(s, u));
            EXPECT_NEAR(lhs, rhs, 1e-11 * std::max(1.0, std::abs(lhs))) << to_string(kind);
        }
    }
}

TEST(Sketch, ScaleMultipliesProducts) {
    const auto sys = gaussian_system(12, 4, 6);
    const auto x = random_vector(4, 6);
    Rng frng(6, stream::kFamily);
    const auto f = SketchFamily::partition(sys.A, 3, frng);
    Rng rng(7);
    auto s = f.sample(rng);
    const auto base = f.evaluate(s, sys.A, sys.b, x);
    s.scale = 10.0;
    const auto big = f.evaluate(s, sys.A, sys.b, x);
    EXPECT_NEAR(big.gamma, 100.0 * base.gamma, 1e-12 * big.gamma);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(big.direction[i], 100.0 * base.direction[i], 1e-11 * norm2(big.direction));
}

TEST(ZeroThreshold, Formula) {
    EXPECT_DOUBLE_EQ(zero_threshold(Vector{0.0}), 16.0 * std::numeric_limits<double>::epsilon());
    EXPECT_DOUBLE_EQ(zero_threshold(Vector{3.0, 4.0}), 96.0 * std::numeric_limits<double>::epsilon());
}

TEST(SketchKind, ParseRoundTrip) {
    for (const auto k : {SketchKind::Partition, SketchKind::CountSketch, SketchKind::Gaussian, SketchKind::SRHT}) {
        EXPECT_EQ(parse_sketch_kind(to_string(k)), k);
    }
    EXPECT_THROW(parse_sketch_kind("fourier"), UsageError);
}

TEST(Srht, FastMatchesExplicitAllPaddedSizes) {
    for (const std::size_t m : {2u, 4u, 8u, 16u, 32u}) {
        const std::size_t q = std::max<std::size_t>(1, m / 2);
        const auto f = SketchFamily::srht(gaussian_matrix(m, 2, m), q);
        const auto H = hadamard(m);
        const double c = std::sqrt(static_cast<double>(m) / static_cast<double>(q));
        Rng rng(m);
        for (int t = 0; t < 20; ++t) {
            const auto s = f.sample(rng);
            const auto v = random_vector(m, static_cast<std::uint64_t>(t));
            const auto fast = f.apply_transpose(s, v);
            for (std::size_t i = 0; i < q; ++i) {
                double e = 0.0;
                for (std::size_t j = 0; j < m; ++j) e += c * H[s.indices[i]][j] * s.signs[j] * v[j];
                EXPECT_NEAR(fast[i], e, 1e-12 * (1 + std::abs(e)));
            }
        }
    }
}

TEST(Draw, GaussianScaleReplay) {
    const auto sys = gaussian_system(15, 5, 11);
    const auto x = random_vector(5, 11);
    const auto f = SketchFamily::gaussian(sys.A, 3);
    for (const double c : {0.1, 10.0}) {
        Rng a(12);
        Rng b(12);
        const auto base = f.draw(sys.A, sys.b, x, a, zero_threshold(sys.b), 1.0);
        const auto scaled = f.draw(sys.A, sys.b, x, b, zero_threshold(sys.b), c);
        ASSERT_TRUE(base && scaled);
        EXPECT_NEAR(scaled->gamma, c * c * base->gamma, 1e-12 * scaled->gamma);
        for (std::size_t i = 0; i < 5; ++i) {
            EXPECT_NEAR(scaled->direction[i], c * c * base->direction[i], 1e-12 * norm2(scaled->direction));
        }
        EXPECT_NE(norm2(base->direction), 0.0);
    }
}

TEST(Sketch, ExpectedGramIsPositiveDefinite) {
    const std::size_t m = 12;
    const auto A = gaussian_matrix(m, 3, 13);
    Rng frng(13, stream::kFamily);
    for (const auto kind : {SketchKind::Partition, SketchKind::CountSketch, SketchKind::Gaussian, SketchKind::SRHT}) {
        const auto f = SketchFamily::make(kind, A, 4, frng);
        Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(m, m);
        Rng rng(14);
        const int draws = 1000;
        for (int t = 0; t < draws; ++t) {
            const auto cols = explicit_sketch_columns(f, f.sample(rng));
            for (const auto& col : cols) {
                const Eigen::Map<const Eigen::VectorXd> v(col.data(), static_cast<Eigen::Index>(m));
                mean += v * v.transpose();
            }
        }
        mean /= draws;
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(mean);
        EXPECT_GT(eig.eigenvalues().minCoeff(), 1e-3) << to_string(kind);
    }
}
