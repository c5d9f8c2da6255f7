#include "diproperm/directions.hpp"

#include "diproperm/error.hpp"
#include "diproperm/gram.hpp"
#include "diproperm/solvers.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace diproperm {

namespace {

constexpr std::array<std::pair<DirectionMethod, std::string_view>, 5> kNames{{
    {DirectionMethod::MD, "md"},
    {DirectionMethod::FLD, "fld"},
    {DirectionMethod::SVM, "svm"},
    {DirectionMethod::DWD, "dwd"},
    {DirectionMethod::MDP, "mdp"},
}};

Matrix centered_pool(const PooledSample& pooled) {
    const Vector mean = pooled.z_rows.colwise().mean().transpose();
    return pooled.z_rows.rowwise() - mean.transpose();
}

}  // namespace

std::string_view to_string(DirectionMethod method) {
    for (const auto& [m, name] : kNames)
        if (m == method) return name;
    return "?";
}

DirectionMethod parse_direction(std::string_view token) {
    for (const auto& [m, name] : kNames)
        if (name == token) return m;
    throw InvalidArgument("unknown direction '" + std::string(token) + "'");
}

double pinv_rtol(Index d, Index total) { return 1e-10 * static_cast<double>(std::max(d, total)); }

ScatterMatrices scatter_matrices(const SamplePair& sp) {
    const Matrix xc = sp.x().rowwise() - sp.mean_x().transpose();
    const Matrix yc = sp.y().rowwise() - sp.mean_y().transpose();
    ScatterMatrices s;
    s.within_w = xc.transpose() * xc + yc.transpose() * yc;
    const Matrix zc = centered_pool(pool(sp));
    s.total_s = zc.transpose() * zc;
    s.pooled_unbiased = s.within_w / static_cast<double>(sp.total() - 2);
    return s;
}

double default_penalty(const SamplePair& sp) { return gram::default_penalty(gram::make(pool(sp))); }

DirectionVector compute_direction(const SamplePair& sp, DirectionMethod method, const SolverOptions& opts) {
    const PooledSample pooled = pool(sp);
    const gram::Fit f = gram::fit(gram::make(pooled), method, opts);
    Vector w = centered_pool(pooled).transpose() * f.coef;
    w.normalize();
    return {std::move(w), method};
}

DirectionVector md_direction(const SamplePair& sp) { return compute_direction(sp, DirectionMethod::MD); }
DirectionVector fld_direction(const SamplePair& sp) { return compute_direction(sp, DirectionMethod::FLD); }
DirectionVector mdp_direction(const SamplePair& sp) { return compute_direction(sp, DirectionMethod::MDP); }
DirectionVector svm_direction(const SamplePair& sp, const SolverOptions& opts) {
    return compute_direction(sp, DirectionMethod::SVM, opts);
}
DirectionVector dwd_direction(const SamplePair& sp, const SolverOptions& opts) {
    return compute_direction(sp, DirectionMethod::DWD, opts);
}

Vector fld_weights(const SamplePair& sp) {
    const PooledSample pooled = pool(sp);
    return centered_pool(pooled).transpose() * gram::raw_coefficients(gram::make(pooled), DirectionMethod::FLD);
}

double dwd_objective(const SamplePair& sp, const Vector& w, double c_penalty) {
    const Vector unit = w.normalized();
    Vector scores(sp.total());
    scores << sp.x() * unit, sp.y() * unit;
    Vector y(sp.total());
    y << Vector::Ones(sp.m()), -Vector::Ones(sp.n());
    // Convex in the length t of the weight vector; golden-section search on (0, 1].
    auto at = [&](double t) { return solvers::dwd_primal(t * scores, y, c_penalty); };
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 0.0, hi = 1.0;
    double a = hi - ratio * (hi - lo), b = lo + ratio * (hi - lo);
    double fa = at(a), fb = at(b);
    for (int it = 0; it < 80; ++it) {
        if (fa < fb) {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = at(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = at(b);
        }
    }
    return std::min({at(1.0), fa, fb});
}

}  // namespace diproperm
