#include <gtest/gtest.h>

#include "fdi/defaults.hpp"
#include "fdi/pipeline.hpp"
#include "fdi/simulator.hpp"

using fdi::Matrix;
using fdi::Vector;

namespace {

fdi::DiscreteLtiModel toy(double a = 0.5) {
    fdi::ClosedLoopMatrices cl{Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 0.2),
                               (Matrix(2, 1) << 1.0, 1.0).finished(), (Matrix(2, 1) << 1.0, 0.0).finished()};
    return fdi::DiscreteLtiModel::from_matrices(cl, 0.5);
}

const fdi::ModelBundle& default_model() {
    static const auto m = fdi::build_model(fdi::defaults::areas(), fdi::defaults::attacked_labels(), 0.5);
    return m;
}

fdi::Scenario base(double horizon = 10.0) {
    fdi::Scenario s;
    s.horizon = horizon;
    s.sample_time = 0.5;
    s.onset = horizon / 2.0;
    return s;
}

} // namespace

TEST(Simulate, NothingInNothingOut) {
    const auto m = toy();
    const fdi::StaticDetector det(m.c);
    const auto trace = fdi::simulate(m, base(), det);
    ASSERT_EQ(trace.records.size(), 21u);
    for (const auto& r : trace.records) {
        EXPECT_EQ(r.x, Vector::Zero(1));
        EXPECT_EQ(r.y, Vector::Zero(2));
        EXPECT_EQ(r.rs_inf, 0.0);
        EXPECT_TRUE(std::isnan(r.r_d));
    }
    EXPECT_EQ(trace.records.back().t, 10.0);
    EXPECT_EQ(trace.warmup_samples, 0u);
}

TEST(Simulate, RecordCount) {
    const auto m = toy();
    const fdi::StaticDetector det(m.c);
    for (double h : {0.5, 1.0, 7.25, 60.0}) {
        auto s = base(h);
        EXPECT_EQ(fdi::simulate(m, s, det).records.size(), static_cast<std::size_t>(std::floor(h / 0.5)) + 1);
    }
}

TEST(Simulate, OnsetIsExclusive) {
    const auto m = toy();
    const fdi::StaticDetector det(m.c);
    auto s = base();
    s.onset = 2.0;
    s.attack = Vector::Constant(1, 3.0);
    const auto trace = fdi::simulate(m, s, det);
    for (const auto& r : trace.records) EXPECT_EQ(r.f[0], r.k > 4 ? 3.0 : 0.0) << r.k;
    // y[5] sees D_f f and the state has not moved yet
    EXPECT_EQ(trace.records[5].y[0], 3.0);
    EXPECT_NEAR(trace.records[6].x[0], 0.6, 1e-15);
}

TEST(Simulate, NoiseDrawOrder) {
    const auto m = toy();
    const fdi::StaticDetector det(m.c);
    auto s = base();
    s.seed = 99;
    s.load_std = Vector::Constant(1, 0.5);
    s.process_covariance = Vector::Constant(1, 0.04);
    s.measurement_covariance = (Vector(2) << 0.01, 0.09).finished();
    const auto trace = fdi::simulate(m, s, det);

    fdi::GaussianRng rng(99);
    Vector x = Vector::Zero(1);
    for (std::size_t k = 0; k < 5; ++k) {
        const double d = 0.5 * rng.normal();
        const double w = 0.2 * rng.normal();
        const Vector v = (Vector(2) << 0.1 * rng.normal(), 0.3 * rng.normal()).finished();
        const auto& r = trace.records[k];
        EXPECT_DOUBLE_EQ(r.d[0], d);
        EXPECT_LT((r.y - (m.c * x + v)).cwiseAbs().maxCoeff(), 1e-15);
        x = m.a * x + m.bd * Vector::Constant(1, d) + Vector::Constant(1, w);
    }
}

TEST(Simulate, DeterministicPerSeed) {
    const auto& mb = default_model();
    const fdi::StaticDetector det(mb.discrete.c);
    auto s = base(20.0);
    s.load_std = Vector::Constant(3, 0.03);
    s.seed = 7;
    const auto a = fdi::simulate(mb.discrete, s, det);
    const auto b = fdi::simulate(mb.discrete, s, det);
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t k = 0; k < a.records.size(); ++k) {
        EXPECT_EQ(a.records[k].x, b.records[k].x);
        EXPECT_EQ(a.records[k].rs_inf, b.records[k].rs_inf);
    }
    EXPECT_EQ(a.scenario_hash, b.scenario_hash);
    s.seed = 8;
    const auto c = fdi::simulate(mb.discrete, s, det);
    EXPECT_NE(a.records[1].x, c.records[1].x);
    EXPECT_NE(a.scenario_hash, c.scenario_hash);
}

TEST(Simulate, Superposition) {
    const auto& mb = default_model();
    const auto& m = mb.discrete;
    const fdi::StaticDetector det(m.c);
    auto loads = base(30.0);
    loads.load_std = Vector::Constant(3, 0.05);
    loads.seed = 3;
    auto attack = base(30.0);
    attack.attack = fdi::synthesize_attack(fdi::defaults::attack_space(), (Vector(3) << 2.8, 1.0, -2.3).finished());
    auto both = loads;
    both.attack = attack.attack;
    const auto t1 = fdi::simulate(m, loads, det);
    const auto t2 = fdi::simulate(m, attack, det);
    const auto t3 = fdi::simulate(m, both, det);
    for (std::size_t k = 0; k < t3.records.size(); ++k) {
        EXPECT_LT((t1.records[k].x + t2.records[k].x - t3.records[k].x).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LT((t1.records[k].y + t2.records[k].y - t3.records[k].y).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Simulate, StealthyAttackLeavesStaticResidualUnchanged) {
    const auto& m = default_model().discrete;
    const fdi::StaticDetector det(m.c);
    auto s = base(30.0);
    s.load_std = Vector::Constant(3, 0.05);
    const auto clean = fdi::simulate(m, s, det);
    s.attack = fdi::synthesize_attack(fdi::defaults::attack_space(), (Vector(3) << 2.8, 1.0, -2.3).finished());
    const auto attacked = fdi::simulate(m, s, det);
    for (std::size_t k = 0; k < clean.records.size(); ++k) {
        EXPECT_NEAR(clean.records[k].rs_inf, attacked.records[k].rs_inf, 1e-8);
    }
}

TEST(Simulate, FilterRunsAlongside) {
    const auto m = toy();
    const fdi::StaticDetector det(m.c);
    std::vector<fdi::RowVector> num{fdi::RowVector::Ones(2), fdi::RowVector::Ones(2)};
    const auto trace = fdi::simulate(m, base(), det, fdi::RealizedFilter(num, 0.5));
    EXPECT_EQ(trace.warmup_samples, 1u);
    for (const auto& r : trace.records) EXPECT_EQ(r.r_d, 0.0);
    std::vector<fdi::RowVector> wrong{fdi::RowVector::Ones(3)};
    EXPECT_THROW((void)fdi::simulate(m, base(), det, fdi::RealizedFilter(wrong, 0.5)), fdi::DimensionError);
}

TEST(Simulate, Divergence) {
    const auto m = toy(2.0);
    const fdi::StaticDetector det(m.c);
    auto s = base(100.0);
    s.load_series.assign(s.num_steps() + 1, Vector::Ones(1));
    EXPECT_THROW((void)fdi::simulate(m, s, det), fdi::NumericError);
}

TEST(Scenario, Validation) {
    const auto m = toy();
    auto check = [&](auto edit) {
        auto s = base();
        edit(s);
        s.validate(m);
    };
    EXPECT_NO_THROW(check([](fdi::Scenario&) {}));
    EXPECT_THROW(check([](fdi::Scenario& s) { s.horizon = 0.0; }), fdi::ValidationError);
    EXPECT_THROW(check([](fdi::Scenario& s) { s.onset = 11.0; }), fdi::ValidationError);
    EXPECT_THROW(check([](fdi::Scenario& s) { s.onset = -1.0; }), fdi::ValidationError);
    EXPECT_THROW(check([](fdi::Scenario& s) { s.sample_time = 0.25; }), fdi::ValidationError);
    EXPECT_THROW(check([](fdi::Scenario& s) { s.attack = Vector::Ones(2); }), fdi::DimensionError);
    EXPECT_THROW(check([](fdi::Scenario& s) { s.load_std = Vector::Constant(1, -0.1); }), fdi::ValidationError);
    EXPECT_THROW(check([](fdi::Scenario& s) { s.load_std = Vector::Ones(2); }), fdi::DimensionError);
    EXPECT_THROW(check([](fdi::Scenario& s) { s.measurement_covariance = Vector::Ones(1); }), fdi::DimensionError);
    EXPECT_THROW(check([](fdi::Scenario& s) { s.load_series.assign(5, Vector::Ones(1)); }), fdi::DimensionError);
    EXPECT_THROW(check([](fdi::Scenario& s) { s.load_series.assign(21, Vector::Ones(2)); }), fdi::DimensionError);
}

TEST(GenDisturbance, ZeroStdAndSeries) {
    fdi::GaussianRng rng(1);
    fdi::Scenario s;
    EXPECT_EQ(fdi::gen_disturbance(s, rng, 3), Vector::Zero(3));
    s.load_std = Vector::Zero(3);
    EXPECT_EQ(fdi::gen_disturbance(s, rng, 3), Vector::Zero(3));
    s.load_series = {Vector::Constant(3, 1.0), Vector::Constant(3, 2.0)};
    EXPECT_EQ(fdi::gen_disturbance(s, rng, 3, 1), Vector::Constant(3, 2.0));
}

TEST(GenDisturbance, SampleMoments) {
    fdi::GaussianRng rng(5);
    fdi::Scenario s;
    s.load_std = (Vector(2) << 1.0, 0.1).finished();
    const int n = 100000;
    Vector sum = Vector::Zero(2);
    Vector sq = Vector::Zero(2);
    for (int i = 0; i < n; ++i) {
        const Vector d = fdi::gen_disturbance(s, rng, 2);
        sum += d;
        sq += d.cwiseProduct(d);
    }
    EXPECT_NEAR(sum[0] / n, 0.0, 0.02);
    EXPECT_NEAR(sum[1] / n, 0.0, 0.002);
    EXPECT_NEAR(sq[0] / n, 1.0, 0.02);
    EXPECT_NEAR(sq[1] / n, 0.01, 0.0002);
}

TEST(GaussianRng, UniformRange) {
    fdi::GaussianRng rng(0);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

TEST(Hashing, Fnv1aKnownValues) {
    EXPECT_EQ(fdi::fnv1a(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fdi::fnv1a("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(fdi::fnv1a("foobar"), 0x85944171f73967e8ULL);
}

TEST(Hashing, ScenarioHashTracksContent) {
    auto s = base();
    const auto h = fdi::scenario_hash(s);
    EXPECT_EQ(fdi::scenario_hash(base()), h);
    s.attack = Vector::Zero(1);
    EXPECT_NE(fdi::scenario_hash(s), h);
    auto t = base();
    t.load_std = Vector::Constant(1, 1e-9);
    EXPECT_NE(fdi::scenario_hash(t), h);
}
