#include <gtest/gtest.h>

#include <random>

#include "fdi/defaults.hpp"
#include "fdi/pipeline.hpp"
#include "fdi/residual.hpp"

using fdi::Matrix;
using fdi::RowVector;
using fdi::Vector;

namespace {

double binomial(int n, int k) {
    if (k < 0) return n == -1 ? 1.0 : 0.0; // (1 - pz)^0 = 1
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Impulse response of (1-p)^d N(q) / (q-p)^d by series division in q^{-1}.
std::vector<double> series_impulse(const std::vector<double>& n, double p, int count) {
    const int d = static_cast<int>(n.size()) - 1;
    std::vector<double> h(static_cast<std::size_t>(count), 0.0);
    for (int k = 0; k < count; ++k) {
        double acc = 0.0;
        for (int m = 0; m <= std::min(k, d); ++m) {
            const int rest = k - m;
            acc += n[static_cast<std::size_t>(d - m)] * binomial(rest + d - 1, d - 1) * std::pow(p, rest);
        }
        h[static_cast<std::size_t>(k)] = std::pow(1.0 - p, d) * acc;
    }
    return h;
}

fdi::RealizedFilter scalar_filter(const std::vector<double>& n, double p) {
    std::vector<RowVector> rows;
    for (double c : n) rows.push_back(RowVector::Constant(1, c));
    return fdi::RealizedFilter(rows, p);
}

} // namespace

TEST(StaticDetector, RangeOfCIsSilent) {
    std::mt19937_64 gen(1);
    std::normal_distribution<double> n;
    Matrix c(5, 2);
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = n(gen);
    const fdi::StaticDetector det(c);
    const fdi::StaticDetector weighted(c, Vector::LinSpaced(5, 0.5, 2.5));
    for (int trial = 0; trial < 20; ++trial) {
        const Vector x = (Vector(2) << n(gen), n(gen)).finished();
        EXPECT_LE(det.residual_norm(c * x), 1e-12);
        EXPECT_LE(weighted.residual_norm(c * x), 1e-12);
    }
    Vector e = Vector::Zero(5);
    e[0] = 1.0;
    EXPECT_GT(det.residual_norm(e), 1e-3);
    EXPECT_EQ(fdi::static_residual(e, c), det.residual(e));
}

TEST(StaticDetector, UnweightedIsOrthogonalProjection) {
    Matrix c(3, 1);
    c << 1, 1, 0;
    const fdi::StaticDetector det(c);
    const Vector r = det.residual((Vector(3) << 1.0, 0.0, 2.0).finished());
    EXPECT_NEAR(r[0], 0.5, 1e-15);
    EXPECT_NEAR(r[1], -0.5, 1e-15);
    EXPECT_NEAR(r[2], 2.0, 1e-15);
    EXPECT_NEAR(det.residual_norm((Vector(3) << 1.0, 0.0, 2.0).finished()), 2.0, 1e-15);
}

TEST(StaticDetector, WeightedResidualFavorsPreciseChannels) {
    Matrix c(2, 1);
    c << 1, 1;
    // tiny variance on channel 0: the fit follows it and the residual lands on channel 1
    const fdi::StaticDetector det(c, (Vector(2) << 1e-6, 1.0).finished());
    const Vector r = det.residual((Vector(2) << 1.0, 0.0).finished());
    EXPECT_NEAR(r[0], 0.0, 1e-5);
    EXPECT_NEAR(r[1], -1.0, 1e-5);
}

TEST(StaticDetector, RejectsBadCovariance) {
    EXPECT_THROW(fdi::StaticDetector(Matrix::Ones(2, 1), Vector::Zero(2)), fdi::ValidationError);
    EXPECT_THROW(fdi::StaticDetector(Matrix::Ones(2, 1), (Vector(2) << 1.0, -1.0).finished()), fdi::ValidationError);
    const fdi::StaticDetector det(Matrix::Ones(2, 1));
    EXPECT_THROW((void)det.residual(Vector::Zero(3)), fdi::DimensionError);
}

TEST(Denominator, NormalizedWithRootAtPole) {
    for (std::size_t d = 0; d <= 4; ++d) {
        for (double p : {0.2, 0.5, 0.8}) {
            const Vector a = fdi::denominator_coefficients(p, d);
            ASSERT_EQ(a.size(), static_cast<Eigen::Index>(d + 1));
            EXPECT_NEAR(a.sum(), 1.0, 1e-12); // a(1) = 1
            double at_p = 0.0;
            for (Eigen::Index i = 0; i < a.size(); ++i) at_p += a[i] * std::pow(p, static_cast<double>(i));
            if (d > 0) {
                EXPECT_NEAR(at_p, 0.0, 1e-12);
            }
            EXPECT_NEAR(a[static_cast<Eigen::Index>(d)], std::pow(1.0 - p, -static_cast<double>(d)), 1e-12);
        }
    }
    const Vector a = fdi::denominator_coefficients(0.8, 2);
    EXPECT_NEAR(a[0], 0.64 / 0.04, 1e-12);
    EXPECT_NEAR(a[1], -1.6 / 0.04, 1e-12);
    EXPECT_NEAR(a[2], 1.0 / 0.04, 1e-12);
}

TEST(RealizedFilter, DegreeZeroIsMemoryless) {
    std::vector<RowVector> n{(RowVector(2) << 2.0, -1.0).finished()};
    fdi::RealizedFilter f(n, 0.8);
    EXPECT_EQ(f.degree(), 0u);
    EXPECT_DOUBLE_EQ(f.step((Vector(2) << 1.0, 1.0).finished()), 1.0);
    EXPECT_DOUBLE_EQ(f.step((Vector(2) << 3.0, 0.0).finished()), 6.0);
}

TEST(RealizedFilter, FirstOrderRecursion) {
    // r[k] = 0.8 r[k-1] + 0.2 (n0 y[k-1] + n1 y[k])
    auto f = scalar_filter({1.0, 2.0}, 0.8);
    const std::vector<double> y{1.0, -1.0, 0.5, 0.0, 2.0};
    double prev_r = 0.0;
    double prev_y = 0.0;
    for (double v : y) {
        const double expected = 0.8 * prev_r + 0.2 * (prev_y + 2.0 * v);
        const double r = f.step(Vector::Constant(1, v));
        EXPECT_NEAR(r, expected, 1e-14);
        prev_r = r;
        prev_y = v;
    }
}

TEST(RealizedFilter, ImpulseMatchesSeriesDivision) {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int d = 0; d <= 4; ++d) {
        for (double p : {0.3, 0.8}) {
            std::vector<double> n;
            for (int i = 0; i <= d; ++i) n.push_back(u(gen));
            auto f = scalar_filter(n, p);
            const auto h = series_impulse(n, p, 20);
            for (int k = 0; k < 20; ++k) {
                const double r = f.step(Vector::Constant(1, k == 0 ? 1.0 : 0.0));
                EXPECT_NEAR(r, h[static_cast<std::size_t>(k)], 1e-12) << "d=" << d << " p=" << p << " k=" << k;
            }
        }
    }
}

TEST(RealizedFilter, DcGainIsNumeratorSum) {
    auto f = scalar_filter({0.5, -1.0, 2.0, 0.25}, 0.8);
    double r = 0.0;
    for (int k = 0; k < 400; ++k) r = f.step(Vector::Constant(1, 1.0));
    EXPECT_NEAR(r, 1.75, 1e-10);
}

TEST(RealizedFilter, ForgetsInitialTransient) {
    auto f = scalar_filter({1.0, 1.0, 1.0, 1.0}, 0.8);
    (void)f.step(Vector::Constant(1, 1e3));
    double r = 0.0;
    for (int k = 0; k < 300; ++k) r = f.step(Vector::Zero(1));
    EXPECT_LT(std::abs(r), 1e-12);
}

TEST(RealizedFilter, ZeroInLinearOutAndReset) {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> n;
    std::vector<RowVector> num;
    for (int i = 0; i < 3; ++i) num.push_back((RowVector(3) << n(gen), n(gen), n(gen)).finished());
    fdi::RealizedFilter f(num, 0.6), g(num, 0.6), h(num, 0.6);
    for (int k = 0; k < 10; ++k) EXPECT_EQ(f.step(Vector::Zero(3)), 0.0);
    for (int k = 0; k < 30; ++k) {
        const Vector a = (Vector(3) << n(gen), n(gen), n(gen)).finished();
        const Vector b = (Vector(3) << n(gen), n(gen), n(gen)).finished();
        const double ra = f.step(a);
        const double rb = g.step(b);
        EXPECT_NEAR(h.step(2.0 * a - b), 2.0 * ra - rb, 1e-12);
    }
    f.reset();
    g.reset();
    const Vector y = Vector::Ones(3);
    EXPECT_EQ(f.step(y), g.step(y));
}

TEST(RealizedFilter, Validation) {
    EXPECT_THROW(scalar_filter({1.0}, 0.0), std::domain_error);
    EXPECT_THROW(scalar_filter({1.0}, 1.0), std::domain_error);
    EXPECT_THROW(scalar_filter({1.0}, -0.5), std::domain_error);
    EXPECT_THROW(fdi::RealizedFilter({}, 0.5), fdi::DimensionError);
    EXPECT_THROW(fdi::RealizedFilter({RowVector::Ones(2), RowVector::Ones(3)}, 0.5), fdi::DimensionError);
    auto f = scalar_filter({1.0, 1.0}, 0.5);
    EXPECT_THROW((void)f.step(Vector::Zero(2)), fdi::DimensionError);
}

TEST(RealizeFilter, UsesLAndChecksShapes) {
    fdi::FilterDesign d;
    d.degree = 1;
    d.n_r = 2;
    d.nbar = (Vector(4) << 1.0, 2.0, 3.0, 4.0).finished();
    d.pole = 0.5;
    const fdi::PolynomialMatrix l({(Matrix(2, 1) << 0.0, -1.0).finished()});
    const auto f = fdi::realize_filter(d, l);
    ASSERT_EQ(f.numerator().size(), 2u);
    EXPECT_EQ(f.numerator()[0](0), -2.0);
    EXPECT_EQ(f.numerator()[1](0), -4.0);
    EXPECT_EQ(f.pole(), 0.5);
    const fdi::PolynomialMatrix l2({Matrix::Zero(2, 1), Matrix::Zero(2, 1)});
    EXPECT_THROW((void)fdi::realize_filter(d, l2), fdi::DimensionError);
    d.nbar = Vector::Ones(3);
    EXPECT_THROW((void)fdi::realize_filter(d, l), fdi::DimensionError);
}

TEST(SteadyStateGain, SumOfBlocks) {
    fdi::FilterDesign d;
    d.degree = 1;
    d.n_r = 2;
    d.nbar = (Vector(4) << 1.0, -2.0, 0.0, 3.0).finished();
    const Matrix sig = Matrix::Identity(2, 2);
    EXPECT_DOUBLE_EQ(fdi::steady_state_gain(d, sig, Vector::Ones(2)), -2.0);
    EXPECT_THROW((void)fdi::steady_state_gain(d, Matrix::Identity(3, 3), Vector::Ones(3)), fdi::DimensionError);
}

TEST(DefaultModel, FilterDecouplesLoads) {
    const auto model = fdi::build_model(fdi::defaults::areas(), fdi::defaults::attacked_labels(), 0.5);
    const auto space = fdi::make_attack_space(model, fdi::defaults::attack_basis(), Matrix::Ones(1, 3),
                                              Vector::Constant(1, 1.5));
    const auto design = fdi::run_design(model, space, {});
    auto filter = fdi::realize_filter(design.design, model.dae.l);
    std::mt19937_64 gen(4);
    std::normal_distribution<double> n(0.0, 0.05);
    Vector x = Vector::Zero(model.discrete.num_states());
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
        Vector d(model.discrete.num_disturbances());
        for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = n(gen);
        const Vector y = model.discrete.c * x;
        const double r = filter.step(y);
        if (k >= 3) worst = std::max(worst, std::abs(r));
        x = model.discrete.a * x + model.discrete.bd * d;
    }
    EXPECT_LE(worst, 1e-8);
}
