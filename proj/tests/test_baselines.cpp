#include "diproperm/baselines.hpp"
#include "diproperm/directions.hpp"
#include "diproperm/error.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace diproperm;

namespace {

Matrix rows1(std::initializer_list<double> v) {
    Matrix out(Index(v.size()), 1);
    Index i = 0;
    for (double x : v) out(i++, 0) = x;
    return out;
}

double brute_energy(const SamplePair& sp) {
    const double m = double(sp.m()), n = double(sp.n());
    double xy = 0, xx = 0, yy = 0;
    for (Index i = 0; i < sp.m(); ++i)
        for (Index j = 0; j < sp.n(); ++j) xy += (sp.x().row(i) - sp.y().row(j)).norm();
    for (Index i = 0; i < sp.m(); ++i)
        for (Index j = 0; j < sp.m(); ++j) xx += (sp.x().row(i) - sp.x().row(j)).norm();
    for (Index i = 0; i < sp.n(); ++i)
        for (Index j = 0; j < sp.n(); ++j) yy += (sp.y().row(i) - sp.y().row(j)).norm();
    return m * n / (m + n) * (2 * xy / (m * n) - xx / (m * m) - yy / (n * n));
}

SamplePair transform(const SamplePair& sp, const Matrix& a, const Vector& shift) {
    Matrix x = sp.x() * a.transpose();
    Matrix y = sp.y() * a.transpose();
    x.rowwise() += shift.transpose();
    y.rowwise() += shift.transpose();
    return SamplePair(std::move(x), std::move(y));
}

}  // namespace

TEST(Energy, HandExamples) {
    EXPECT_DOUBLE_EQ(energy_statistic(SamplePair(rows1({0}), rows1({1}))), 1.0);
    EXPECT_NEAR(energy_statistic(SamplePair(rows1({0, 2}), rows1({1, 3}))), 1.0, 1e-14);
}

TEST(Energy, IdenticalMultisetsGiveZero) {
    const SamplePair a = fixtures::gaussian_pair(7, 7, 5, 3);
    EXPECT_NEAR(energy_statistic(SamplePair(a.x(), a.x())), 0.0, 1e-12);
    Matrix reversed = a.x().colwise().reverse();
    EXPECT_NEAR(energy_statistic(SamplePair(a.x(), reversed)), 0.0, 1e-12);
}

TEST(Energy, MatchesBruteForce) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const SamplePair sp = fixtures::gaussian_pair(6 + Index(seed), 9, 50, seed, 0.2);
        const double ref = brute_energy(sp);
        EXPECT_NEAR(energy_statistic(sp), ref, 1e-10 * std::abs(ref));
    }
}

TEST(Energy, TranslationRotationScaling) {
    const SamplePair sp = fixtures::gaussian_pair(8, 10, 6, 12, 0.4);
    Engine e(2);
    const Matrix q = fixtures::random_orthogonal(6, e);
    const Vector shift = fixtures::gaussian_matrix(6, 1, e, 5.0);
    const double base = energy_statistic(sp);
    EXPECT_NEAR(energy_statistic(transform(sp, Matrix::Identity(6, 6), shift)), base, 1e-10);
    EXPECT_NEAR(energy_statistic(transform(sp, q, Vector::Zero(6))), base, 1e-10);
    EXPECT_NEAR(energy_statistic(transform(sp, 3.5 * Matrix::Identity(6, 6), Vector::Zero(6))), 3.5 * base, 1e-10);
}

TEST(Energy, PermutationCounting) {
    // Observed 1 on this instance; check p against the enumerated distribution.
    const SamplePair sp(rows1({0, 2}), rows1({1, 3}));
    PermutationPlan plan;
    plan.b_perms = 300;
    const EnergyResult r = energy_test(sp, plan);
    EXPECT_NEAR(r.statistic, 1.0, 1e-14);
    ASSERT_EQ(r.perm_stats.size(), 300u);
    std::size_t exceed = 0;
    for (double v : r.perm_stats) exceed += v > r.statistic ? 1 : 0;
    EXPECT_DOUBLE_EQ(r.empirical_p, double(exceed) / 300.0);
    // Splits {0,1}|{2,3} and {2,3}|{0,1} give 3; the remaining four give 1 or -1.
    EXPECT_NEAR(r.empirical_p, 1.0 / 3.0, 0.1);
}

TEST(Energy, StrongSignalPIsZero) {
    const SamplePair sp = fixtures::gaussian_pair(15, 15, 30, 4, 3.0);
    PermutationPlan plan;
    plan.b_perms = 200;
    EXPECT_DOUBLE_EQ(energy_test(sp, plan).empirical_p, 0.0);
}

TEST(Energy, JsonSchema) {
    const SamplePair sp = fixtures::gaussian_pair(5, 5, 4, 4, 0.5);
    PermutationPlan plan;
    plan.b_perms = 20;
    plan.rng = RngPolicy(12);
    const nlohmann::json j = to_json(energy_test(sp, plan), 3);
    EXPECT_EQ(j["method"], "energy");
    EXPECT_EQ(j["seed"], 12);
    EXPECT_EQ(j["b_perms"], 20);
    EXPECT_EQ(j["perm_stats"].size(), 3u);
    EXPECT_TRUE(j.contains("observed"));
    EXPECT_TRUE(j.contains("empirical_p"));
}

TEST(Hotelling, OneDimensionIsSquaredPooledT) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const SamplePair sp = fixtures::gaussian_pair(7, 11, 1, seed, 0.5);
        std::vector<double> x(sp.x().data(), sp.x().data() + sp.m());
        std::vector<double> y(sp.y().data(), sp.y().data() + sp.n());
        const double m = double(x.size()), n = double(y.size());
        const double sp2 = ((m - 1) * oracle::variance(x) + (n - 1) * oracle::variance(y)) / (m + n - 2);
        const double t = (oracle::mean(x) - oracle::mean(y)) / std::sqrt(sp2 * (1 / m + 1 / n));
        const HotellingResult r = hotelling_t2(sp);
        EXPECT_NEAR(r.t2, t * t, 1e-10 * (1 + t * t));
        EXPECT_EQ(r.df1, 1);
        EXPECT_EQ(r.df2, 16);
        EXPECT_NEAR(r.f_stat, t * t, 1e-10 * (1 + t * t));
    }
}

TEST(Hotelling, PValueMatchesClosedFormForTwoDims) {
    // F(2, v) survival function is (1 + 2f/v)^(-v/2).
    const SamplePair sp = fixtures::gaussian_pair(8, 9, 2, 33, 0.7);
    const HotellingResult r = hotelling_t2(sp);
    EXPECT_EQ(r.df1, 2);
    EXPECT_EQ(r.df2, 14);
    EXPECT_NEAR(r.f_stat, r.t2 * 14.0 / (2.0 * 15.0), 1e-12 * r.t2);
    EXPECT_NEAR(r.p_value, std::pow(1 + 2 * r.f_stat / 14.0, -7.0), 1e-12);
}

TEST(Hotelling, EqualMeansGiveUnitP) {
    const Matrix x = (Matrix(3, 2) << 0, 0, 1, 2, 2, 1).finished();
    const Matrix y = (Matrix(3, 2) << 1, 1, 0, 1, 2, 1).finished();
    const HotellingResult r = hotelling_t2(SamplePair(x, y));
    EXPECT_NEAR(r.t2, 0.0, 1e-14);
    EXPECT_DOUBLE_EQ(r.p_value, 1.0);
}

TEST(Hotelling, TooManyDimensionsIsSingular) {
    EXPECT_THROW(hotelling_t2(fixtures::gaussian_pair(4, 4, 7, 1)), SingularCovariance);
    EXPECT_NO_THROW(hotelling_t2(fixtures::gaussian_pair(4, 4, 6, 1)));
    // Duplicated coordinate makes the pooled covariance singular.
    SamplePair sp = fixtures::gaussian_pair(10, 10, 3, 2);
    Matrix x = sp.x(), y = sp.y();
    x.col(2) = x.col(0);
    y.col(2) = y.col(0);
    EXPECT_THROW(hotelling_t2(SamplePair(x, y)), SingularCovariance);
}

TEST(Hotelling, AffineInvariant) {
    Engine e(8);
    for (int rep = 0; rep < 10; ++rep) {
        const SamplePair sp = fixtures::gaussian_pair(12, 15, 5, 40 + rep, 0.3);
        const Matrix a = fixtures::gaussian_matrix(5, 5, e) + 2 * Matrix::Identity(5, 5);
        const Vector shift = fixtures::gaussian_matrix(5, 1, e, 10.0);
        const double base = hotelling_t2(sp).t2;
        EXPECT_NEAR(hotelling_t2(transform(sp, a, shift)).t2, base, 1e-8 * (1 + base));
    }
}

TEST(Hotelling, FldBridgeIdentity) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Index m = 6 + Index(seed % 7), n = 5 + Index(seed % 5), d = 1 + Index(seed % 4);
        const SamplePair sp = fixtures::gaussian_pair(m, n, d, 500 + seed, 0.3);
        const Vector diff = (sp.x().colwise().mean() - sp.y().colwise().mean()).transpose();
        const double lhs = diff.dot(fld_weights(sp));
        const double total = double(m + n);
        const double rhs = hotelling_t2(sp).t2 * total / (double(m * n) * (total - 2));
        EXPECT_NEAR(lhs, rhs, 1e-8 * (1 + std::abs(rhs)));
    }
}

TEST(RandomProjection, IdentityProjectionReproducesHotelling) {
    const SamplePair sp = fixtures::gaussian_pair(10, 12, 4, 21, 0.4);
    const HotellingResult a = hotelling_t2(sp);
    const HotellingResult b = rp_test_with_projection(sp, Matrix::Identity(4, 4));
    EXPECT_DOUBLE_EQ(a.t2, b.t2);
    EXPECT_DOUBLE_EQ(a.p_value, b.p_value);
    EXPECT_EQ(a.df1, b.df1);
    EXPECT_EQ(a.df2, b.df2);
}

TEST(RandomProjection, DimensionBounds) {
    const SamplePair sp = fixtures::gaussian_pair(6, 9, 50, 1);
    RPConfig cfg;
    EXPECT_EQ(rp_dimension(sp, cfg), 3);
    cfg.k = 13;
    EXPECT_EQ(rp_dimension(sp, cfg), 13);
    cfg.k = 14;
    EXPECT_THROW(rp_dimension(sp, cfg), InvalidArgument);
    EXPECT_THROW(rp_test(sp, cfg), InvalidArgument);
    cfg.k = 0;
    EXPECT_THROW(rp_test(sp, cfg), InvalidArgument);
    EXPECT_THROW(rp_test_with_projection(sp, Matrix::Identity(3, 4)), InvalidArgument);
}

TEST(RandomProjection, DeterministicPerSeed) {
    const SamplePair sp = fixtures::gaussian_pair(20, 20, 60, 5);
    RPConfig cfg;
    cfg.rng = RngPolicy(9);
    EXPECT_EQ(rp_test(sp, cfg).t2, rp_test(sp, cfg).t2);
    Engine s = cfg.rng.stream(0);
    const Matrix p = fixtures::gaussian_matrix(10, 60, s);
    EXPECT_NEAR(rp_test(sp, cfg).t2, rp_test_with_projection(sp, p).t2, 1e-10 * rp_test(sp, cfg).t2);
}

TEST(RandomProjection, NullCalibration) {
    const int runs = 500;
    int rejections = 0;
    for (int r = 0; r < runs; ++r) {
        const SamplePair sp = fixtures::gaussian_pair(50, 50, 200, 7000 + r);
        RPConfig cfg;
        cfg.k = 25;
        cfg.rng = RngPolicy(r);
        rejections += rp_test(sp, cfg).p_value < 0.1 ? 1 : 0;
    }
    const double band = 2.576 * std::sqrt(0.1 * 0.9 / runs);
    EXPECT_NEAR(double(rejections) / runs, 0.1, band);
}

TEST(RandomProjection, JsonSchema) {
    const SamplePair sp = fixtures::gaussian_pair(10, 10, 20, 5);
    RPConfig cfg;
    const nlohmann::json j = to_json(rp_test(sp, cfg), "rp", 4);
    EXPECT_EQ(j["method"], "rp");
    EXPECT_EQ(j["seed"], 4);
    for (const char* key : {"observed", "f_stat", "df1", "df2", "p_value"}) EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(j["df1"], 5);
    EXPECT_EQ(j["df2"], 14);
}
