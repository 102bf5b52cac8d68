#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fdi/numerics.hpp"

using fdi::Matrix;
using fdi::Vector;

namespace {

Matrix random_matrix(std::mt19937_64& gen, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = u(gen);
    return m;
}

} // namespace

TEST(Expm, ZeroIsIdentity) {
    EXPECT_TRUE(fdi::expm(Matrix::Zero(4, 4)).isApprox(Matrix::Identity(4, 4)));
}

TEST(Expm, EmptyMatrix) {
    EXPECT_EQ(fdi::expm(Matrix(0, 0)).size(), 0);
}

TEST(Expm, Scalar) {
    Matrix a(1, 1);
    a << -0.7;
    EXPECT_NEAR(fdi::expm(a)(0, 0), std::exp(-0.7), 1e-15);
    a << 12.0;
    EXPECT_NEAR(fdi::expm(a)(0, 0) / std::exp(12.0), 1.0, 1e-13);
}

TEST(Expm, Nilpotent) {
    Matrix a(3, 3);
    a << 0, 1, 0, 0, 0, 1, 0, 0, 0;
    Matrix expected(3, 3);
    expected << 1, 1, 0.5, 0, 1, 1, 0, 0, 1;
    EXPECT_LT((fdi::expm(a) - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Expm, Rotation) {
    const double t = 2.3;
    Matrix a(2, 2);
    a << 0, -t, t, 0;
    Matrix expected(2, 2);
    expected << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    EXPECT_LT((fdi::expm(a) - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Expm, SymmetricMatchesEigendecomposition) {
    std::mt19937_64 gen(1);
    for (int n = 1; n <= 8; ++n) {
        const Matrix m = random_matrix(gen, n, n, 3.0);
        const Matrix s = m + m.transpose();
        Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
        const Matrix expected =
            eig.eigenvectors() * eig.eigenvalues().array().exp().matrix().asDiagonal() * eig.eigenvectors().transpose();
        EXPECT_LT((fdi::expm(s) - expected).norm() / expected.norm(), 1e-12) << "n = " << n;
    }
}

TEST(Expm, InverseIsExpOfNegative) {
    std::mt19937_64 gen(2);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix a = random_matrix(gen, 5, 5, 4.0);
        EXPECT_LT((fdi::expm(a) * fdi::expm(-a) - Matrix::Identity(5, 5)).norm(), 1e-9);
    }
}

TEST(Expm, CommutingSumIsProduct) {
    std::mt19937_64 gen(3);
    const Matrix a = random_matrix(gen, 4, 4);
    const Matrix e = fdi::expm(a);
    EXPECT_LT((fdi::expm(2.0 * a) - e * e).norm() / e.squaredNorm(), 1e-13);
}

TEST(Expm, RejectsNonSquareAndNonFinite) {
    EXPECT_THROW((void)fdi::expm(Matrix::Zero(2, 3)), fdi::DimensionError);
    Matrix bad = Matrix::Zero(2, 2);
    bad(0, 1) = std::nan("");
    EXPECT_THROW((void)fdi::expm(bad), fdi::NumericError);
}

TEST(NumericalRank, RelativeAndScaled) {
    Vector sv(3);
    sv << 10.0, 1e-3, 1e-12;
    EXPECT_EQ(fdi::numerical_rank(sv, 1e-9), 2);
    EXPECT_EQ(fdi::numerical_rank(sv, 1e-2), 1);
    Vector tiny(2);
    tiny << 1e-16, 1e-17;
    // relative to itself both count; against scale 1 neither does
    EXPECT_EQ(fdi::numerical_rank(tiny, 1e-9), 2);
    EXPECT_EQ(fdi::numerical_rank(tiny, 1e-9, 1.0), 0);
}

TEST(LeftNullBasis, AnnihilatesAndIsOrthonormal) {
    std::mt19937_64 gen(4);
    for (int rank = 0; rank <= 4; ++rank) {
        const Matrix m = random_matrix(gen, 7, rank) * random_matrix(gen, rank, 5);
        const Matrix z = fdi::left_null_basis(m);
        EXPECT_EQ(z.rows(), 7 - rank);
        EXPECT_EQ(z.cols(), 7);
        EXPECT_LT((z * m).cwiseAbs().maxCoeff(), 1e-12);
        if (z.rows() > 0) {
            EXPECT_LT((z * z.transpose() - Matrix::Identity(z.rows(), z.rows())).cwiseAbs().maxCoeff(), 1e-12);
        }
    }
}

TEST(LeftNullBasis, FullRowRankIsEmpty) {
    Matrix m(2, 3);
    m << 1, 0, 0, 0, 1, 0;
    EXPECT_EQ(fdi::left_null_basis(m).rows(), 0);
}

TEST(LeftNullBasis, ScaleFloorTreatsRoundoffAsZero) {
    Matrix m = Matrix::Zero(3, 1);
    m(0, 0) = 1e-17;
    EXPECT_EQ(fdi::left_null_basis(m).rows(), 2);
    EXPECT_EQ(fdi::left_null_basis(m, fdi::kDefaultRankTol, 1.0).rows(), 3);
}

TEST(WeightedProjector, IdempotentAndFixesRange) {
    std::mt19937_64 gen(5);
    const Matrix c = random_matrix(gen, 6, 3);
    Vector w(6);
    w << 1, 2, 3, 0.5, 10, 0.1;
    for (const auto& weights : {std::optional<Vector>{}, std::optional<Vector>{w}}) {
        const Matrix p = fdi::weighted_range_projector(c, weights);
        EXPECT_LT((p * p - p).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((p * c - c).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT(((Matrix::Identity(6, 6) - p) * c).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(WeightedProjector, UnweightedIsSymmetric) {
    std::mt19937_64 gen(6);
    const Matrix p = fdi::weighted_range_projector(random_matrix(gen, 5, 2));
    EXPECT_LT((p - p.transpose()).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_NEAR(p.trace(), 2.0, 1e-12);
}

TEST(WeightedProjector, WeightedResidualIsWOrthogonal) {
    std::mt19937_64 gen(7);
    const Matrix c = random_matrix(gen, 5, 2);
    Vector w(5);
    w << 1, 4, 0.25, 2, 3;
    const Matrix p = fdi::weighted_range_projector(c, w);
    const Vector y = random_matrix(gen, 5, 1);
    const Vector r = y - p * y;
    EXPECT_LT((c.transpose() * w.asDiagonal() * r).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(WeightedProjector, RankDeficientReportsColumns) {
    Matrix c(4, 3);
    c << 1, 2, 3, 0, 1, 1, 1, 0, 1, 2, 1, 3; // col3 = col1 + col2
    try {
        (void)fdi::weighted_range_projector(c);
        FAIL() << "expected SingularityError";
    } catch (const fdi::SingularityError& e) {
        EXPECT_EQ(e.deficient_columns(), 1);
    }
}

TEST(WeightedProjector, BadWeights) {
    const Matrix c = Matrix::Identity(3, 2);
    EXPECT_THROW((void)fdi::weighted_range_projector(c, Vector::Ones(2)), fdi::DimensionError);
    Vector w = Vector::Ones(3);
    w[1] = 0.0;
    EXPECT_ANY_THROW((void)fdi::weighted_range_projector(c, w));
}

TEST(BlockDiagonal, Layout) {
    Matrix a(1, 2);
    a << 1, 2;
    Matrix b(2, 1);
    b << 3, 4;
    Matrix expected(3, 3);
    expected << 1, 2, 0, 0, 0, 3, 0, 0, 4;
    EXPECT_EQ(fdi::block_diagonal({a, b}), expected);
}

TEST(Norms, MaxAbsAndInf) {
    Matrix m(2, 2);
    m << 1, -5, 2, 2;
    EXPECT_EQ(fdi::max_abs(m), 5.0);
    EXPECT_EQ(fdi::inf_norm(m), 6.0);
    EXPECT_EQ(fdi::max_abs(Matrix(0, 0)), 0.0);
}
