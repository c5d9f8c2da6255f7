#include "diproperm/error.hpp"
#include "diproperm/statistics.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace diproperm;

namespace {

ProjectionSummary ps(std::vector<double> px, std::vector<double> py) { return summarize(std::move(px), std::move(py)); }

const StatKind kAllStats[] = {StatKind::MeanDiff,      StatKind::WelchT, StatKind::ScaledMeanDiff, StatKind::MedianDiff,
                              StatKind::MedianOverMAD, StatKind::AUC,    StatKind::PairedT};

std::vector<double> transform(const std::vector<double>& v, double scale, double shift) {
    std::vector<double> out;
    for (double x : v) out.push_back(scale * x + shift);
    return out;
}

Matrix rows2(std::initializer_list<std::pair<double, double>> values) {
    Matrix m(static_cast<Index>(values.size()), 2);
    Index i = 0;
    for (auto [a, b] : values) {
        m(i, 0) = a;
        m(i, 1) = b;
        ++i;
    }
    return m;
}

}  // namespace

TEST(Tokens, RoundTrip) {
    for (auto k : kAllStats) EXPECT_EQ(parse_stat(to_string(k)), k);
    EXPECT_THROW(parse_stat("kurtosis"), InvalidArgument);
}

TEST(Project, SimpleAxis) {
    const SamplePair sp(rows2({{1, 0}, {3, 0}}), rows2({{0, 0}}));
    const ProjectionSummary p = project(sp, DirectionVector{(Vector(2) << 1, 0).finished(), DirectionMethod::MD});
    EXPECT_EQ(p.px, (std::vector<double>{1, 3}));
    EXPECT_EQ(p.py, (std::vector<double>{0}));
    EXPECT_DOUBLE_EQ(p.mean_x, 2);
    EXPECT_DOUBLE_EQ(p.mean_y, 0);
    EXPECT_DOUBLE_EQ(p.var_x, 2);
    EXPECT_DOUBLE_EQ(p.var_y, 0);
    EXPECT_DOUBLE_EQ(p.s_value, p.var_x / 2 + p.var_y / 1);
    EXPECT_DOUBLE_EQ(stat_mean_diff(p), 2);
}

TEST(Project, MeanDirectionGivesCentroidDistance) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const SamplePair sp = fixtures::gaussian_pair(6, 9, 40, seed, 0.1);
        const ProjectionSummary p = project(sp, md_direction(sp));
        EXPECT_NEAR(p.mean_x - p.mean_y, (sp.mean_x() - sp.mean_y()).norm(), 1e-10);
        EXPECT_NEAR(p.t_value, p.mean_x - p.mean_y, 1e-15);
    }
}

TEST(Project, OrthogonalComponentsIgnored) {
    const SamplePair sp = fixtures::gaussian_pair(4, 5, 3, 8);
    const Vector w = (Vector(3) << 0, 1, 0).finished();
    const Vector v = (Vector(3) << 2.5, 0, -7).finished();
    const SamplePair moved(sp.x().rowwise() + v.transpose(), sp.y().rowwise() + v.transpose());
    const DirectionVector dv{w, DirectionMethod::MD};
    EXPECT_EQ(project(sp, dv).px, project(moved, dv).px);
}

TEST(MeanDiff, Examples) {
    EXPECT_DOUBLE_EQ(stat_mean_diff(ps({1, 3}, {0})), 2);
    EXPECT_DOUBLE_EQ(stat_mean_diff(ps({1, 5, 2}, {1, 5, 2})), 0);
    EXPECT_NEAR(evaluate(SamplePair(rows2({{3, 4}}), rows2({{0, 0}})), DirectionMethod::MD, StatKind::MeanDiff), 5.0,
                1e-14);
}

TEST(Welch, HandArithmetic) {
    EXPECT_NEAR(stat_welch_t(ps({0, 2}, {5, 7})), -5.0 / std::sqrt(2.0), 1e-15);
    EXPECT_DOUBLE_EQ(stat_welch_t(ps({1, 4, 2}, {1, 4, 2})), 0);
    EXPECT_NEAR(stat_welch_t(ps({0, 20}, {50, 70})), stat_welch_t(ps({0, 2}, {5, 7})), 1e-15);
}

TEST(Welch, DegenerateCases) {
    EXPECT_THROW(stat_welch_t(ps({1, 1}, {1, 1})), ZeroVariance);
    const double s = stat_welch_t(ps({2, 2}, {1, 1}));
    EXPECT_TRUE(is_degenerate_stat(s));
    EXPECT_GT(s, 0);
    EXPECT_THROW(stat_welch_t(ps({1}, {1, 2})), InvalidArgument);
}

TEST(ScaledMeanDiff, Examples) {
    ProjectionSummary p = ps({5}, {0});
    p.px.resize(50, 5);
    p.py.resize(50, 0);
    p = summarize(p.px, p.py);
    EXPECT_NEAR(stat_scaled_mean_diff(p, 1, 1), 25.0, 1e-12);
    EXPECT_THROW(stat_scaled_mean_diff(p, 0, 0), ZeroVariance);
}

TEST(ScaledMeanDiff, InvariantToDataScale) {
    const SamplePair sp = fixtures::gaussian_pair(10, 14, 30, 4, 0.4);
    const SamplePair scaled(sp.x() * 9.0, sp.y() * 9.0);
    EXPECT_NEAR(evaluate(sp, DirectionMethod::MD, StatKind::ScaledMeanDiff),
                evaluate(scaled, DirectionMethod::MD, StatKind::ScaledMeanDiff), 1e-10);
}

TEST(ScaledMeanDiff, PerCoordinateVariances) {
    const SamplePair sp = fixtures::gaussian_pair(7, 5, 4, 9);
    const auto [sx2, sy2] = per_coordinate_variances(sp);
    const Matrix xc = sp.x().rowwise() - sp.mean_x().transpose();
    EXPECT_NEAR(sx2, xc.squaredNorm() / (6.0 * 4.0), 1e-14);
    const Matrix yc = sp.y().rowwise() - sp.mean_y().transpose();
    EXPECT_NEAR(sy2, yc.squaredNorm() / (4.0 * 4.0), 1e-14);
}

TEST(Median, Examples) {
    EXPECT_DOUBLE_EQ(stat_median_diff(ps({0, 2, 4}, {1})), 1);
    EXPECT_DOUBLE_EQ(stat_median_over_mad(ps({0, 2, 4}, {1})), 1);
    const std::vector<double> px{0.5, 3, 1.25, 9};
    EXPECT_DOUBLE_EQ(stat_median_diff(ps(px, transform(px, -1, 0))), 2 * oracle::median(px));
    EXPECT_THROW(stat_median_over_mad(ps({1, 1, 1}, {0, 0})), ZeroVariance);
}

TEST(Auc, Examples) {
    EXPECT_DOUBLE_EQ(stat_auc(ps({2, 3}, {0, 1})), 1.0);
    EXPECT_DOUBLE_EQ(stat_auc(ps({1, 1, 1}, {1, 1})), 0.5);
    EXPECT_DOUBLE_EQ(stat_auc(ps({0, 2}, {1, 3})), 0.25);
}

TEST(Auc, ComplementAndRange) {
    Engine e(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a, b;
        for (int i = 0; i < 13; ++i) a.push_back(double(uniform_index(e, 6)));
        for (int i = 0; i < 8; ++i) b.push_back(double(uniform_index(e, 6)));
        const double ab = stat_auc(ps(a, b)), ba = stat_auc(ps(b, a));
        EXPECT_GE(ab, 0);
        EXPECT_LE(ab, 1);
        EXPECT_NEAR(ab + ba, 1.0, 1e-15);
        EXPECT_NEAR(ab, oracle::auc(a, b), 1e-15);
    }
}

TEST(PairedT, Examples) {
    EXPECT_THROW(stat_paired_t(ps({1, 2}, {0, 1})), ZeroVariance);
    EXPECT_NEAR(stat_paired_t(ps({0, 4}, {0, 0})), 1.0, 1e-15);
    EXPECT_THROW(stat_paired_t(ps({0, 4, 1}, {0, 0})), PairingError);
}

TEST(Evaluate, Composition) {
    const SamplePair sp(rows2({{3, 4}, {3, 4}}), rows2({{0, 0}, {0, 0}}));
    EXPECT_NEAR(evaluate(sp, DirectionMethod::MD, StatKind::MeanDiff), 5.0, 1e-14);
    EXPECT_THROW(evaluate(SamplePair(rows2({{1, 1}}), rows2({{1, 1}})), DirectionMethod::MD, StatKind::MeanDiff),
                 DegenerateDirection);
}

TEST(Evaluate, WelchIgnoresDirectionLength) {
    const SamplePair sp = fixtures::gaussian_pair(8, 6, 5, 3, 0.5);
    DirectionVector dv = md_direction(sp);
    const double t = stat_welch_t(project(sp, dv));
    dv.w *= 13.0;
    EXPECT_NEAR(stat_welch_t(project(sp, dv)), t, 1e-12 * std::abs(t));
    EXPECT_NEAR(evaluate(sp, DirectionMethod::MD, StatKind::WelchT), t, 1e-12 * std::abs(t));
}

TEST(Invariance, ShiftAndScaleForEveryStatistic) {
    Engine e(12);
    std::normal_distribution<double> normal;
    std::vector<double> a, b;
    for (int i = 0; i < 9; ++i) a.push_back(normal(e) + 0.7);
    for (int i = 0; i < 9; ++i) b.push_back(normal(e));
    for (StatKind k : kAllStats) {
        const double base = compute_stat(k, ps(a, b), 1.3, 0.8);
        const double shifted = compute_stat(k, ps(transform(a, 1, 4.25), transform(b, 1, 4.25)), 1.3, 0.8);
        EXPECT_NEAR(shifted, base, 1e-12 * (1 + std::abs(base))) << to_string(k);
    }
    for (StatKind k : {StatKind::WelchT, StatKind::AUC, StatKind::MedianOverMAD, StatKind::PairedT}) {
        const double base = compute_stat(k, ps(a, b));
        EXPECT_NEAR(compute_stat(k, ps(transform(a, 3.5, 0), transform(b, 3.5, 0))), base, 1e-12 * (1 + std::abs(base)))
            << to_string(k);
    }
    for (StatKind k : {StatKind::MeanDiff, StatKind::MedianDiff}) {
        const double base = compute_stat(k, ps(a, b));
        EXPECT_NEAR(compute_stat(k, ps(transform(a, 3.5, 0), transform(b, 3.5, 0))), 3.5 * base, 1e-12)
            << to_string(k);
    }
}

TEST(Oracle, RandomProjectionVectors) {
    Engine e(2718);
    const SamplePair sp = fixtures::gaussian_pair(17, 12, 8, 99, 0.3);
    for (int trial = 0; trial < 1000; ++trial) {
        Vector w = fixtures::gaussian_matrix(8, 1, e).col(0);
        w.normalize();
        const ProjectionSummary p = project(sp, DirectionVector{w, DirectionMethod::MD});
        std::vector<double> a, b;
        for (Index i = 0; i < sp.m(); ++i) a.push_back(sp.x().row(i).dot(w));
        for (Index j = 0; j < sp.n(); ++j) b.push_back(sp.y().row(j).dot(w));
        const double t = oracle::welch(a, b);
        ASSERT_NEAR(stat_welch_t(p), t, 1e-12 * std::max(1.0, std::abs(t)));
        ASSERT_NEAR(stat_auc(p), oracle::auc(a, b), 1e-12);
        ASSERT_NEAR(stat_median_diff(p), oracle::median(a) - oracle::median(b), 1e-12);
        ASSERT_NEAR(stat_median_over_mad(p), oracle::median_over_mad(a, b), 1e-12 * std::max(1.0, std::abs(oracle::median_over_mad(a, b))));
    }
}
