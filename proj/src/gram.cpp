#include "diproperm/gram.hpp"

#include "diproperm/error.hpp"
#include "diproperm/solvers.hpp"
#include "diproperm/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace diproperm::gram {

PooledGram make(const PooledSample& pooled) {
    PooledGram g;
    const Vector mean = pooled.z_rows.colwise().mean().transpose();
    const Matrix centered = pooled.z_rows.rowwise() - mean.transpose();
    g.k = centered * centered.transpose();
    g.mean_dot = centered * mean;
    g.mean_sq = mean.squaredNorm();
    g.d = pooled.d();
    g.split_m = pooled.split_m;
    return g;
}

PooledGram reorder(const PooledGram& g, std::span<const std::size_t> order) {
    const Index n = g.total();
    PooledGram out;
    out.k.resize(n, n);
    out.mean_dot.resize(n);
    for (Index j = 0; j < n; ++j) {
        const auto src_j = static_cast<Index>(order[static_cast<std::size_t>(j)]);
        for (Index i = 0; i < n; ++i) out.k(i, j) = g.k(static_cast<Index>(order[static_cast<std::size_t>(i)]), src_j);
        out.mean_dot[j] = g.mean_dot[src_j];
    }
    out.mean_sq = g.mean_sq;
    out.d = g.d;
    out.split_m = g.split_m;
    return out;
}

Vector contrast(Index total, Index split_m) {
    Vector c(total);
    c.head(split_m).setConstant(1.0 / static_cast<double>(split_m));
    c.tail(total - split_m).setConstant(-1.0 / static_cast<double>(total - split_m));
    return c;
}

namespace {

Vector labels(Index total, Index split_m) {
    Vector y(total);
    y.head(split_m).setOnes();
    y.tail(total - split_m).setConstant(-1.0);
    return y;
}

// Removes each group's mean from a vector (applies I - P).
Vector remove_group_means(const Vector& v, Index split_m) {
    Vector out = v;
    const Index rest = v.size() - split_m;
    out.head(split_m).array() -= v.head(split_m).mean();
    out.tail(rest).array() -= v.tail(rest).mean();
    return out;
}

// (I - P) K (I - P): Gram matrix of the within-class centered observations.
Matrix within_gram(const Matrix& k, Index split_m) {
    const Index n = k.rows();
    Matrix out = k;
    for (Index j = 0; j < n; ++j) out.col(j) = remove_group_means(out.col(j), split_m);
    Matrix t = out.transpose();
    for (Index j = 0; j < n; ++j) t.col(j) = remove_group_means(t.col(j), split_m);
    return 0.5 * (t + t.transpose());
}

struct PseudoInverse {
    Eigen::SelfAdjointEigenSolver<Matrix> eig;
    Vector inv;  // reciprocal of retained eigenvalues, 0 elsewhere
    double lambda_max = 0;

    PseudoInverse(const Matrix& sym, double rtol) : eig(sym) {
        const Vector& ev = eig.eigenvalues();
        lambda_max = std::max(0.0, ev.maxCoeff());
        inv = Vector::Zero(ev.size());
        if (lambda_max <= 0) return;
        for (Index i = 0; i < ev.size(); ++i)
            if (ev[i] > rtol * lambda_max) inv[i] = 1.0 / ev[i];
    }
    Vector apply(const Vector& v, int power) const {
        const Matrix& u = eig.eigenvectors();
        Vector coords = u.transpose() * v;
        for (int p = 0; p < power; ++p) coords.array() *= inv.array();
        return u * coords;
    }
};

struct GroupNorms {
    double delta_sq;
    double mean_x_norm;
    double mean_y_norm;
};

GroupNorms group_norms(const PooledGram& g, const Vector& c) {
    const Index m = g.split_m;
    const Index n = g.total() - m;
    const double xx = g.k.topLeftCorner(m, m).sum() / (double(m) * m);
    const double yy = g.k.bottomRightCorner(n, n).sum() / (double(n) * n);
    const double xz = g.mean_dot.head(m).mean();
    const double yz = g.mean_dot.tail(n).mean();
    return {std::max(0.0, c.dot(g.k * c)), std::sqrt(std::max(0.0, xx + 2 * xz + g.mean_sq)),
            std::sqrt(std::max(0.0, yy + 2 * yz + g.mean_sq))};
}

void require_mean_separation(const GroupNorms& norms) {
    if (std::sqrt(norms.delta_sq) < 1e-14 * (1.0 + norms.mean_x_norm + norms.mean_y_norm))
        throw DegenerateDirection("group means coincide");
}

void require_nonzero_weights(const PooledGram& g, const Vector& coef) {
    const double wnorm = std::sqrt(std::max(0.0, coef.dot(g.k * coef)));
    const double scale = g.k.diagonal().cwiseMax(0.0).cwiseSqrt().maxCoeff();
    if (!(wnorm > 1e-10 * coef.lpNorm<1>() * scale)) throw DegenerateDirection("classifier weight vector is zero");
}

Vector solver_coefficients(const PooledGram& g, DirectionMethod method, const SolverOptions& opts) {
    const Index n = g.total();
    const Vector y = labels(n, g.split_m);
    const double c = opts.c_penalty ? *opts.c_penalty : default_penalty(g);
    if (!(c > 0) || !std::isfinite(c)) throw DegenerateDirection("no between-class distance to set the penalty");
    const long cap = opts.max_iter_per_obs * static_cast<long>(n);
    if (method == DirectionMethod::DWD) {
        // The pairwise dual ascent is fast when the norm constraint binds; when
        // it stalls, the barrier method settles the problem in the primal.
        const long dual_cap = std::min<long>(cap, 100L * static_cast<long>(n));
        try {
            const solvers::DualSolution sol = solvers::dwd_dual(g.k, y, c, opts.tol, dual_cap);
            Vector coef = sol.alpha.cwiseProduct(y);
            require_nonzero_weights(g, coef);
            return coef;
        } catch (const SolverError&) {
            if (cap <= dual_cap) throw;
        }
        Vector coef = solvers::dwd_primal_coefficients(g.k, y, c, opts.tol, std::max<long>(1, cap / n));
        if (!(std::sqrt(std::max(0.0, coef.dot(g.k * coef))) > 1e-8))
            throw DegenerateDirection("classifier weight vector is zero");
        return coef;
    }
    const solvers::DualSolution sol = solvers::svm_dual(g.k, y, c, opts.tol, cap);
    Vector coef = sol.alpha.cwiseProduct(y);
    require_nonzero_weights(g, coef);
    return coef;
}

}  // namespace

double default_penalty(const PooledGram& g) {
    const Index m = g.split_m;
    const Index n = g.total() - m;
    std::vector<double> dist;
    dist.reserve(static_cast<std::size_t>(m * n));
    for (Index j = m; j < m + n; ++j)
        for (Index i = 0; i < m; ++i) dist.push_back(std::sqrt(std::max(0.0, g.k(i, i) + g.k(j, j) - 2 * g.k(i, j))));
    double med = median(std::move(dist));
    return 100.0 / (med * med);
}

std::pair<double, double> per_coordinate_variances(const PooledGram& g) {
    const Index m = g.split_m;
    const Index n = g.total() - m;
    auto group = [&](Index start, Index size) {
        if (size < 2) return 0.0;
        const auto block = g.k.block(start, start, size, size);
        const double ss = block.trace() - block.sum() / double(size);
        return std::max(0.0, ss) / (double(size - 1) * double(g.d));
    };
    return {group(0, m), group(m, n)};
}

Vector raw_coefficients(const PooledGram& g, DirectionMethod method, const SolverOptions& opts) {
    const Index n = g.total();
    const Index m = g.split_m;
    const Vector c = contrast(n, m);
    const GroupNorms norms = group_norms(g, c);
    const double rtol = pinv_rtol(g.d, n);

    Vector coef;
    switch (method) {
        case DirectionMethod::MD:
            require_mean_separation(norms);
            coef = c;
            break;
        case DirectionMethod::FLD: {
            require_mean_separation(norms);
            const PseudoInverse pinv(within_gram(g.k, m), rtol);
            const Vector b = remove_group_means(g.k * c, m);
            coef = remove_group_means(pinv.apply(b, 2), m);
            if (!(c.dot(g.k * coef) > 1e-10 * norms.delta_sq / std::max(pinv.lambda_max, 1e-300)) ||
                pinv.lambda_max <= 0)
                throw DegenerateDirection("mean difference lies in the null space of the within-class scatter");
            break;
        }
        case DirectionMethod::MDP: {
            require_mean_separation(norms);
            const PseudoInverse pinv(0.5 * (g.k + g.k.transpose()), rtol);
            coef = pinv.apply(c, 1);
            if (!(c.dot(g.k * coef) > 1e-10 * norms.delta_sq / std::max(pinv.lambda_max, 1e-300)))
                throw DegenerateDirection("mean difference lies in the null space of the total scatter");
            break;
        }
        case DirectionMethod::SVM:
        case DirectionMethod::DWD:
            coef = solver_coefficients(g, method, opts);
            break;
    }
    return coef;
}

Fit fit(const PooledGram& g, DirectionMethod method, const SolverOptions& opts) {
    const Index n = g.total();
    const Index m = g.split_m;
    Vector coef = raw_coefficients(g, method, opts);
    Vector kc = g.k * coef;
    const double wnorm = std::sqrt(std::max(0.0, coef.dot(kc)));
    if (!(wnorm > 0) || !std::isfinite(wnorm)) throw DegenerateDirection("zero direction");
    coef /= wnorm;
    kc /= wnorm;
    if (kc.head(m).mean() < kc.tail(n - m).mean()) {
        coef = -coef;
        kc = -kc;
    }
    Fit out;
    out.offset = coef.dot(g.mean_dot);
    out.coef = std::move(coef);
    out.centered = std::move(kc);
    return out;
}

}  // namespace diproperm::gram
