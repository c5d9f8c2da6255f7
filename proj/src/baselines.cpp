#include "diproperm/baselines.hpp"

#include "diproperm/error.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/distributions/fisher_f.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace diproperm {

namespace {

Matrix pairwise_distances(const Matrix& z) {
    const Index total = z.rows();
    const Vector sq = z.rowwise().squaredNorm();
    Matrix g = z * z.transpose();
    Matrix dist(total, total);
    for (Index i = 0; i < total; ++i) {
        dist(i, i) = 0;
        for (Index j = i + 1; j < total; ++j) {
            // Explicit differences keep full precision for nearby points.
            const double approx = sq[i] + sq[j] - 2 * g(i, j);
            double v;
            if (approx < 1e-8 * (sq[i] + sq[j]))
                v = (z.row(i) - z.row(j)).norm();
            else
                v = std::sqrt(approx);
            dist(i, j) = dist(j, i) = v;
        }
    }
    return dist;
}

double energy_from_distances(const Matrix& dist, std::span<const std::size_t> order, Index m) {
    const Index total = dist.rows();
    const Index n = total - m;
    double xy = 0, xx = 0, yy = 0;
    for (Index a = 0; a < total; ++a) {
        const Index i = static_cast<Index>(order[static_cast<std::size_t>(a)]);
        for (Index b = a + 1; b < total; ++b) {
            const double v = dist(i, static_cast<Index>(order[static_cast<std::size_t>(b)]));
            const bool ax = a < m, bx = b < m;
            if (ax && bx)
                xx += v;
            else if (!ax && !bx)
                yy += v;
            else
                xy += v;
        }
    }
    const double md = double(m), nd = double(n);
    return (md * nd / (md + nd)) * (2.0 * xy / (md * nd) - 2.0 * xx / (md * md) - 2.0 * yy / (nd * nd));
}

}  // namespace

double energy_statistic(const SamplePair& sp) {
    const PooledSample p = pool(sp);
    std::vector<std::size_t> identity(static_cast<std::size_t>(p.total()));
    for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = i;
    return energy_from_distances(pairwise_distances(p.z_rows), identity, p.split_m);
}

EnergyResult energy_test(const SamplePair& sp, const PermutationPlan& plan) {
    const PooledSample p = pool(sp);
    const Matrix dist = pairwise_distances(p.z_rows);
    const auto values = permutation_distribution(static_cast<std::size_t>(p.total()), plan,
                                                 [&](std::span<const std::size_t> order) {
                                                     return energy_from_distances(dist, order, p.split_m);
                                                 });
    EnergyResult r;
    r.statistic = values.front();
    r.perm_stats.assign(values.begin() + 1, values.end());
    r.empirical_p = empirical_pvalue(r.statistic, r.perm_stats, plan.smoothed_p);
    r.b_perms = r.perm_stats.size();
    r.seed = plan.rng.master_seed();
    return r;
}

HotellingResult hotelling_t2(const SamplePair& sp) {
    const Index m = sp.m(), n = sp.n(), total = sp.total(), d = sp.d();
    if (d > total - 2)
        throw SingularCovariance("Hotelling T^2 needs d <= N - 2 (d = " + std::to_string(d) + ", N = " +
                                 std::to_string(total) + ")");
    const Vector mx = sp.mean_x(), my = sp.mean_y();
    const Matrix xc = sp.x().rowwise() - mx.transpose();
    const Matrix yc = sp.y().rowwise() - my.transpose();
    const Matrix su = (xc.transpose() * xc + yc.transpose() * yc) / double(total - 2);

    Eigen::SelfAdjointEigenSolver<Matrix> eig(su);
    const double lmax = eig.eigenvalues().cwiseAbs().maxCoeff();
    if (!(lmax > 0) || eig.eigenvalues().minCoeff() <= 1e-12 * lmax * double(d))
        throw SingularCovariance("pooled covariance is singular");
    const Vector delta = mx - my;
    const Vector proj = eig.eigenvectors().transpose() * delta;
    const double quad = (proj.array().square() / eig.eigenvalues().array()).sum();

    HotellingResult r;
    r.t2 = double(m) * double(n) / double(total) * quad;
    r.df1 = d;
    r.df2 = total - d - 1;
    r.f_stat = r.t2 * double(total - d - 1) / (double(d) * double(total - 2));
    boost::math::fisher_f_distribution<double> f(double(r.df1), double(r.df2));
    r.p_value = r.f_stat <= 0 ? 1.0 : boost::math::cdf(boost::math::complement(f, r.f_stat));
    return r;
}

Index rp_dimension(const SamplePair& sp, const RPConfig& cfg) {
    const Index k = cfg.k.value_or(std::min(sp.m(), sp.n()) / 2);
    if (k < 1 || k > sp.total() - 2)
        throw InvalidArgument("projected dimension k = " + std::to_string(k) + " must lie in [1, N - 2] with N = " +
                              std::to_string(sp.total()));
    return k;
}

HotellingResult rp_test_with_projection(const SamplePair& sp, const Matrix& projection) {
    if (projection.cols() != sp.d()) throw InvalidArgument("projection matrix width must equal the dimension");
    return hotelling_t2(SamplePair(sp.x() * projection.transpose(), sp.y() * projection.transpose(), sp.label_x(),
                                   sp.label_y()));
}

HotellingResult rp_test(const SamplePair& sp, const RPConfig& cfg) {
    const Index k = rp_dimension(sp, cfg);
    Engine stream = cfg.rng.stream(0);
    std::normal_distribution<double> normal;
    Matrix p(k, sp.d());
    for (Index i = 0; i < k; ++i)
        for (Index j = 0; j < sp.d(); ++j) p(i, j) = normal(stream);
    try {
        return rp_test_with_projection(sp, p);
    } catch (const SingularCovariance& e) {
        throw SingularCovariance(std::string(e.what()) + " after random projection (seed " +
                                 std::to_string(cfg.rng.master_seed()) + ")");
    }
}

nlohmann::json to_json(const EnergyResult& result, std::optional<std::size_t> max_perm_stats) {
    nlohmann::json j;
    j["method"] = "energy";
    j["stat"] = "energy";
    j["observed"] = result.statistic;
    j["empirical_p"] = result.empirical_p;
    j["gauss_p"] = nullptr;
    j["z"] = nullptr;
    try {
        const double z = z_score(result.statistic, result.perm_stats);
        j["z"] = z;
        j["gauss_p"] = 0.5 * std::erfc(z / std::sqrt(2.0));
    } catch (const DegenerateNull&) {
    }
    j["b_perms"] = result.b_perms;
    j["seed"] = result.seed;
    const std::size_t keep = std::min(result.perm_stats.size(), max_perm_stats.value_or(result.perm_stats.size()));
    j["perm_stats"] =
        std::vector<double>(result.perm_stats.begin(), result.perm_stats.begin() + static_cast<std::ptrdiff_t>(keep));
    return j;
}

nlohmann::json to_json(const HotellingResult& result, std::string_view method, std::uint64_t seed) {
    nlohmann::json j;
    j["method"] = std::string(method);
    j["stat"] = "t2";
    j["observed"] = result.t2;
    j["f_stat"] = result.f_stat;
    j["df1"] = result.df1;
    j["df2"] = result.df2;
    j["p_value"] = result.p_value;
    j["seed"] = seed;
    return j;
}

}  // namespace diproperm
