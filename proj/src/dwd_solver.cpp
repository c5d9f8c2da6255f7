#include "diproperm/error.hpp"
#include "diproperm/solvers.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace diproperm::solvers {

namespace {

// Loss after eliminating the slack: 1/u above the kink at 1/sqrt(C), the
// tangent line below it.
double dwd_loss(double u, double c, double root_c) { return u >= 1.0 / root_c ? 1.0 / u : 2.0 * root_c - c * u; }
double dwd_loss_slope(double u, double c, double root_c) { return u >= 1.0 / root_c ? -1.0 / (u * u) : -c; }

// Pair subproblem along s: a_i += y_i s, a_j -= y_j s, v += s (x_i - x_j).
struct PairLine {
    double ai, yi, aj, yj;
    double q, p, r;  // ||v||^2, v.(x_i - x_j), ||x_i - x_j||^2

    double slope(double s) const {
        const double qi = ai + yi * s;
        const double qj = aj - yj * s;
        double out = yi / std::sqrt(qi) - yj / std::sqrt(qj);
        const double norm2 = q + 2 * s * p + s * s * r;
        if (norm2 > 0) out -= (p + s * r) / std::sqrt(norm2);
        return out;
    }
    double curvature(double s) const {
        const double qi = ai + yi * s;
        const double qj = aj - yj * s;
        double out = -0.5 / (qi * std::sqrt(qi)) - 0.5 / (qj * std::sqrt(qj));
        const double norm2 = q + 2 * s * p + s * s * r;
        if (norm2 > 0) {
            const double lin = p + s * r;
            out -= std::max(0.0, r * norm2 - lin * lin) / (norm2 * std::sqrt(norm2));
        }
        return out;
    }
};

// Maximiser of the concave pair objective on [0, hi], given slope(0) > 0.
double solve_pair(const PairLine& line, double hi) {
    if (line.slope(hi) >= 0) return hi;
    double lo = 0.0;
    double up = hi;
    double s = 0.5 * hi;
    for (int it = 0; it < 100; ++it) {
        const double g = line.slope(s);
        if (g > 0)
            lo = s;
        else
            up = s;
        if (g == 0 || up - lo <= 1e-15 * std::max(1.0, up)) break;
        const double h = line.curvature(s);
        double next = h < 0 ? s - g / h : 0.5 * (lo + up);
        if (!(next > lo && next < up)) next = 0.5 * (lo + up);
        s = next;
    }
    return s;
}

}  // namespace

double dwd_primal(const Vector& scores, const Vector& y, double c_penalty) {
    const double root_c = std::sqrt(c_penalty);
    const Index n = scores.size();
    auto slope = [&](double b) {
        double out = 0;
        for (Index k = 0; k < n; ++k) out += y[k] * dwd_loss_slope(y[k] * (scores[k] + b), c_penalty, root_c);
        return out;
    };
    double width = scores.cwiseAbs().maxCoeff() + 1.0 / root_c;
    double lo = -width, hi = width;
    for (int i = 0; i < 200 && slope(lo) > 0; ++i) lo -= (width *= 2);
    width = scores.cwiseAbs().maxCoeff() + 1.0 / root_c;
    for (int i = 0; i < 200 && slope(hi) < 0; ++i) hi += (width *= 2);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (slope(mid) > 0 ? hi : lo) = mid;
    }
    const double b = 0.5 * (lo + hi);
    double value = 0;
    for (Index k = 0; k < n; ++k) value += dwd_loss(y[k] * (scores[k] + b), c_penalty, root_c);
    return value;
}

DualSolution dwd_dual(const Matrix& k, const Vector& y, double c_penalty, double tol, long max_iter) {
    const Index n = k.rows();
    Index n_pos = 0;
    for (Index t = 0; t < n; ++t) n_pos += y[t] > 0 ? 1 : 0;
    const Index n_neg = n - n_pos;

    // Start on the best uniform-by-class point: alpha = a * N / (2 * group size).
    Vector alpha(n);
    {
        Vector c(n);
        for (Index t = 0; t < n; ++t) c[t] = y[t] > 0 ? 1.0 / n_pos : -1.0 / n_neg;
        const double delta = std::sqrt(std::max(0.0, c.dot(k * c)));
        const double half_n = 0.5 * static_cast<double>(n);
        const double s = std::sqrt(half_n) * (std::sqrt(double(n_pos)) + std::sqrt(double(n_neg)));
        const double cap = 2.0 * c_penalty * static_cast<double>(std::min(n_pos, n_neg)) / n;
        double a = delta > 0 ? std::pow(s / (half_n * delta), 2) : cap;
        a = std::min(a, cap);
        for (Index t = 0; t < n; ++t) alpha[t] = a * half_n / (y[t] > 0 ? n_pos : n_neg);
    }

    Vector g;  // g_t = v . x_t
    double vsq = 0;
    auto refresh = [&] {
        const Vector coef = alpha.cwiseProduct(y);
        g = k * coef;
        vsq = std::max(0.0, coef.dot(g));
    };
    refresh();

    auto dual_value = [&] { return 2.0 * alpha.cwiseSqrt().sum() - std::sqrt(vsq); };
    auto gap = [&] {
        const double vnorm = std::sqrt(vsq);
        const double dual = dual_value();
        const double primal = vnorm > 0 ? dwd_primal(g / vnorm, y, c_penalty) : dwd_primal(Vector::Zero(n), y, c_penalty);
        return (primal - dual) / std::max(1.0, std::abs(dual));
    };

    auto in_up = [&](Index t) { return y[t] > 0 ? alpha[t] < c_penalty : alpha[t] > 0; };
    auto in_low = [&](Index t) { return y[t] > 0 ? alpha[t] > 0 : alpha[t] < c_penalty; };

    const double inf = std::numeric_limits<double>::infinity();
    const long check_every = std::max<long>(10, n);
    Vector grad(n);
    double residual = inf;
    for (long iter = 0; iter < max_iter; ++iter) {
        if (iter % check_every == 0) {
            refresh();
            residual = gap();
            if (residual <= tol) return {alpha, iter, residual};
        }
        const double vnorm = std::sqrt(vsq);
        for (Index t = 0; t < n; ++t) grad[t] = 1.0 / std::sqrt(alpha[t]) - (vnorm > 0 ? y[t] * g[t] / vnorm : 0.0);

        double gmax = -inf;
        Index i = -1;
        for (Index t = 0; t < n; ++t)
            if (in_up(t) && y[t] * grad[t] > gmax) {
                gmax = y[t] * grad[t];
                i = t;
            }
        if (i < 0) break;

        // Second-order choice of the partner using the local curvature.
        double best = 0;
        Index j = -1;
        const double ci = 0.5 / (alpha[i] * std::sqrt(alpha[i]));
        for (Index t = 0; t < n; ++t) {
            if (t == i || !in_low(t)) continue;
            const double rate = gmax - y[t] * grad[t];
            if (rate <= 0) continue;
            double curv = ci + 0.5 / (alpha[t] * std::sqrt(alpha[t]));
            if (vnorm > 0) {
                const double r = k(i, i) + k(t, t) - 2 * k(i, t);
                const double p = g[i] - g[t];
                curv += std::max(0.0, r * vsq - p * p) / (vsq * vnorm);
            }
            const double gain = rate * rate / curv;
            if (gain > best) {
                best = gain;
                j = t;
            }
        }
        if (j < 0) {
            refresh();
            residual = gap();
            if (residual <= tol) return {alpha, iter, residual};
            break;
        }

        const PairLine line{alpha[i], y[i], alpha[j], y[j], vsq, g[i] - g[j], k(i, i) + k(j, j) - 2 * k(i, j)};
        const double hi_i = y[i] > 0 ? c_penalty - alpha[i] : alpha[i];
        const double hi_j = y[j] > 0 ? alpha[j] : c_penalty - alpha[j];
        const double hi = std::min(hi_i, hi_j);
        const double step = solve_pair(line, hi);
        if (!(step > 0)) {
            refresh();
            residual = gap();
            if (residual <= tol) return {alpha, iter, residual};
            break;
        }
        alpha[i] += y[i] * step;
        alpha[j] -= y[j] * step;
        if (step == hi_i && y[i] > 0) alpha[i] = c_penalty;
        if (step == hi_j && y[j] < 0) alpha[j] = c_penalty;
        alpha[i] = std::max(alpha[i], std::numeric_limits<double>::min());
        alpha[j] = std::max(alpha[j], std::numeric_limits<double>::min());
        vsq = std::max(0.0, line.q + 2 * step * line.p + step * step * line.r);
        for (Index t = 0; t < n; ++t) g[t] += step * (k(t, i) - k(t, j));
    }
    refresh();
    residual = gap();
    if (residual <= tol) return {alpha, max_iter, residual};
    throw SolverError("DWD dual did not reach its duality-gap tolerance", residual);
}

Vector dwd_primal_coefficients(const Matrix& k, const Vector& y, double c_penalty, double tol, long max_newton) {
    const Index n = k.rows();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(k);
    const double lmax = std::max(0.0, eig.eigenvalues().maxCoeff());
    if (!(lmax > 0)) return Vector::Zero(n);
    std::vector<Index> keep;
    for (Index t = 0; t < n; ++t)
        if (eig.eigenvalues()[t] > 1e-12 * static_cast<double>(n) * lmax) keep.push_back(t);
    const Index r = static_cast<Index>(keep.size());
    // Coordinates of the centered observations in an orthonormal basis of their span.
    Matrix f(n, r);
    for (Index c = 0; c < r; ++c)
        f.col(c) = eig.eigenvectors().col(keep[c]) * std::sqrt(eig.eigenvalues()[keep[c]]);

    const double root_c = std::sqrt(c_penalty);
    const double kink = 1.0 / root_c;
    Vector theta = Vector::Zero(r + 1);  // (w, b)
    {
        Vector md = Vector::Zero(r);
        for (Index t = 0; t < n; ++t) md += y[t] * f.row(t).transpose();
        if (md.norm() > 0) theta.head(r) = 0.5 * md / md.norm();
    }

    auto margins = [&](const Vector& th) { return Vector(y.array() * ((f * th.head(r)).array() + th[r])); };
    auto loss = [&](const Vector& th) {
        const Vector u = margins(th);
        double out = 0;
        for (Index t = 0; t < n; ++t) out += dwd_loss(u[t], c_penalty, root_c);
        return out;
    };
    auto barrier_value = [&](const Vector& th, double mu) {
        const double slack = 1.0 - th.head(r).squaredNorm();
        if (!(slack > 0)) return std::numeric_limits<double>::infinity();
        return loss(th) - mu * std::log(slack);
    };

    double mu = std::max(1.0, loss(theta)) * 1e-2;
    long steps = 0;
    while (true) {
        for (int inner = 0; inner < 200 && steps < max_newton; ++inner, ++steps) {
            const Vector u = margins(theta);
            Vector grad = Vector::Zero(r + 1);
            Matrix hess = Matrix::Zero(r + 1, r + 1);
            Vector row(r + 1);
            for (Index t = 0; t < n; ++t) {
                row.head(r) = f.row(t).transpose();
                row[r] = 1.0;
                grad += y[t] * dwd_loss_slope(u[t], c_penalty, root_c) * row;
                if (u[t] >= kink) hess.selfadjointView<Eigen::Lower>().rankUpdate(row, 2.0 / (u[t] * u[t] * u[t]));
            }
            hess = hess.selfadjointView<Eigen::Lower>();
            const Vector w = theta.head(r);
            const double slack = 1.0 - w.squaredNorm();
            grad.head(r) += 2.0 * mu / slack * w;
            hess.topLeftCorner(r, r) += (2.0 * mu / slack) * Matrix::Identity(r, r) + (4.0 * mu / (slack * slack)) * w * w.transpose();
            hess.diagonal().array() += 1e-12 * (1.0 + hess.diagonal().cwiseAbs().maxCoeff());
            const Vector dir = -hess.ldlt().solve(grad);
            const double decrement = -grad.dot(dir);
            if (!(decrement > 1e-14 * std::max(1.0, std::abs(loss(theta))))) break;
            const double current = barrier_value(theta, mu);
            double step = 1.0;
            while (step > 1e-12 && !(barrier_value(theta + step * dir, mu) <= current - 0.25 * step * decrement)) step *= 0.5;
            if (step <= 1e-12) break;
            theta += step * dir;
        }
        if (mu <= 0.1 * tol * std::max(1.0, loss(theta)) || steps >= max_newton) break;
        mu *= 0.1;
    }
    if (mu > tol * std::max(1.0, loss(theta)))
        throw SolverError("DWD primal barrier iterations exhausted", mu / std::max(1.0, loss(theta)));

    Vector coef = Vector::Zero(n);
    for (Index c = 0; c < r; ++c)
        coef += eig.eigenvectors().col(keep[c]) * (theta[c] / std::sqrt(eig.eigenvalues()[keep[c]]));
    return coef;
}

}  // namespace diproperm::solvers
