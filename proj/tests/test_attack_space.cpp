#include <gtest/gtest.h>

#include <random>

#include "fdi/attack_space.hpp"
#include "fdi/defaults.hpp"

using fdi::Matrix;
using fdi::Vector;

namespace {

const fdi::ContinuousModel& default_model() {
    static const auto m = fdi::assemble_system(fdi::defaults::areas(), fdi::defaults::attacked_labels());
    return m;
}

} // namespace

TEST(StealthResidual, Examples) {
    const auto& m = default_model();
    EXPECT_EQ(fdi::stealth_residual(Vector::Zero(5), m.c, m.df), 0.0);
    const Matrix basis = fdi::defaults::attack_basis();
    for (Eigen::Index i = 0; i < 3; ++i) {
        EXPECT_LE(fdi::stealth_residual(basis.row(i).transpose(), m.c, m.df), 1e-8) << "row " << i;
    }
    Vector bad = Vector::Zero(5);
    bad[0] = 0.1; // component moves, total does not
    const double r = fdi::stealth_residual(bad, m.c, m.df);
    EXPECT_GT(r, 1e-3);
    // least squares over (tie_1_2, tie_1_3, tie_1 = sum) fits (1/15, -1/30),
    // leaving 0.1/3 on each of the three rows
    EXPECT_NEAR(r, 0.1 / 3.0, 1e-12);
    EXPECT_THROW((void)fdi::stealth_residual(Vector::Zero(4), m.c, m.df), fdi::DimensionError);
}

TEST(ComputeBasis, DefaultModelHasThreeDirections) {
    const auto& m = default_model();
    const Matrix b = fdi::compute_basis(m.c, m.df);
    ASSERT_EQ(b.rows(), 3);
    EXPECT_LT((b * b.transpose() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
    for (Eigen::Index i = 0; i < 3; ++i) EXPECT_LE(fdi::stealth_residual(b.row(i).transpose(), m.c, m.df), 1e-8);
    // same span as the hand-built basis
    const Matrix given = fdi::defaults::attack_basis();
    const Matrix proj = given * b.transpose() * b;
    EXPECT_LT((proj - given).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ComputeBasis, AlignedWithMeasurementMapIsAllStealthy) {
    Matrix c(3, 2);
    c << 1, 0, 0, 1, 1, 1;
    EXPECT_EQ(fdi::compute_basis(c, c).rows(), 2);
}

TEST(ComputeBasis, OrthogonalDirectionExcluded) {
    Matrix c(2, 1);
    c << 1, 0;
    Matrix df(2, 1);
    df << 0, 1;
    EXPECT_EQ(fdi::compute_basis(c, df).rows(), 0);
    Matrix df2(2, 2);
    df2 << 1, 0, 0, 1;
    const Matrix b = fdi::compute_basis(c, df2);
    ASSERT_EQ(b.rows(), 1);
    EXPECT_NEAR(std::abs(b(0, 0)), 1.0, 1e-12);
    EXPECT_NEAR(b(0, 1), 0.0, 1e-12);
}

TEST(ComputeBasis, FrequencyMeasurementIsStealthy) {
    const auto m = fdi::assemble_system(fdi::defaults::areas(), {"omega_1"});
    EXPECT_EQ(fdi::compute_basis(m.c, m.df).rows(), 1);
}

TEST(NormalizeBasis, ScaleAndSign) {
    Matrix b(2, 3);
    b << -0.5, 0.25, 0.0, 0.0, 2.0, -4.0;
    const Matrix n = fdi::normalize_basis(b);
    Matrix e(2, 3);
    e << 0.1, -0.05, 0.0, 0.0, 0.05, -0.1;
    EXPECT_LT((n - e).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SynthesizeAttack, WorkedArithmetic) {
    const auto s = fdi::defaults::attack_space();
    const Vector alpha = (Vector(3) << 2.8, 1.0, -2.3).finished();
    const Vector f = fdi::synthesize_attack(s, alpha);
    const Vector expected = (Vector(5) << 0.38, 0.15, 0.53, -0.23, -0.23).finished();
    EXPECT_LT((f - expected).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(fdi::synthesize_attack(s, Vector::Zero(3)), Vector::Zero(5));
    EXPECT_EQ(fdi::synthesize_attack(s, Vector::Unit(3, 0)), s.basis.row(0).transpose());
    EXPECT_THROW((void)fdi::synthesize_attack(s, Vector::Zero(2)), fdi::DimensionError);
}

TEST(SynthesizeAttack, Linear) {
    const auto s = fdi::defaults::attack_space();
    std::mt19937_64 gen(13);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int n = 0; n < 100; ++n) {
        Vector a1(3), a2(3);
        for (int i = 0; i < 3; ++i) {
            a1[i] = u(gen);
            a2[i] = u(gen);
        }
        const Vector lhs = fdi::synthesize_attack(s, a1 + a2);
        const Vector rhs = fdi::synthesize_attack(s, a1) + fdi::synthesize_attack(s, a2);
        EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(SpanProperty, RandomCombinationsAreStealthy) {
    const auto& m = default_model();
    const auto s = fdi::defaults::attack_space();
    std::mt19937_64 gen(14);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int n = 0; n < 100; ++n) {
        Vector alpha(3);
        for (int i = 0; i < 3; ++i) alpha[i] = u(gen);
        EXPECT_LE(fdi::stealth_residual(fdi::synthesize_attack(s, alpha), m.c, m.df), 1e-8);
    }
}

TEST(InPolytope, Examples) {
    auto s = fdi::defaults::attack_space();
    const Vector alpha = (Vector(3) << 2.8, 1.0, -2.3).finished();
    EXPECT_NEAR((s.polytope_a * alpha)[0], 1.5, 1e-12);
    EXPECT_TRUE(fdi::in_polytope(s, alpha, 1e-12));
    EXPECT_FALSE(fdi::in_polytope(s, Vector::Zero(3)));
    s.polytope_a = Matrix::Identity(3, 3);
    s.polytope_b = Vector::Zero(3);
    EXPECT_TRUE(fdi::in_polytope(s, Vector::Ones(3)));
    EXPECT_TRUE(fdi::in_polytope(s, Vector::Zero(3)));
    EXPECT_FALSE(fdi::in_polytope(s, -Vector::Unit(3, 1)));
}

TEST(ValidateAttackSpace, RejectsBadBases) {
    const auto& m = default_model();
    auto s = fdi::defaults::attack_space();
    EXPECT_NO_THROW(fdi::validate_attack_space(s, m.c, m.df));
    s.basis(0, 1) = 0.05; // breaks stealth
    EXPECT_THROW(fdi::validate_attack_space(s, m.c, m.df), fdi::ValidationError);
    s = fdi::defaults::attack_space();
    s.basis.row(2) = s.basis.row(0) + s.basis.row(1);
    EXPECT_THROW(fdi::validate_attack_space(s, m.c, m.df), fdi::ValidationError);
    s = fdi::defaults::attack_space();
    s.polytope_a = Matrix::Ones(1, 2);
    EXPECT_THROW(fdi::validate_attack_space(s, m.c, m.df), fdi::DimensionError);
}
