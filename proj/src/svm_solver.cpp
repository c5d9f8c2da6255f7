#include "diproperm/error.hpp"
#include "diproperm/solvers.hpp"

#include <cmath>
#include <limits>

namespace diproperm::solvers {

namespace {
constexpr double kTau = 1e-12;
}

// Minimises f(a) = 1/2 a'Qa - e'a over 0 <= a <= C, y'a = 0 with
// Q = diag(y) K diag(y). A step of size s moves a_i by +y_i s and a_j by
// -y_j s, which changes w = sum a_k y_k x_k by s (x_i - x_j).
DualSolution svm_dual(const Matrix& k, const Vector& y, double c_penalty, double tol, long max_iter) {
    const Index n = k.rows();
    Vector alpha = Vector::Zero(n);
    Vector grad = Vector::Constant(n, -1.0);
    const double inf = std::numeric_limits<double>::infinity();

    auto in_up = [&](Index t) { return y[t] > 0 ? alpha[t] < c_penalty : alpha[t] > 0; };
    auto in_low = [&](Index t) { return y[t] > 0 ? alpha[t] > 0 : alpha[t] < c_penalty; };

    double violation = inf;
    for (long iter = 0; iter < max_iter; ++iter) {
        double gmax = -inf;
        Index i = -1;
        for (Index t = 0; t < n; ++t) {
            if (in_up(t) && -y[t] * grad[t] >= gmax) {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        double gmin = inf;
        double best = inf;
        Index j = -1;
        for (Index t = 0; t < n; ++t) {
            if (!in_low(t)) continue;
            const double score = -y[t] * grad[t];
            gmin = std::min(gmin, score);
            if (i < 0) continue;
            const double diff = gmax - score;
            if (diff > 0) {
                double quad = k(i, i) + k(t, t) - 2 * k(i, t);
                if (quad <= 0) quad = kTau;
                const double obj = -diff * diff / quad;
                if (obj <= best) {
                    best = obj;
                    j = t;
                }
            }
        }
        violation = (i < 0 || gmin == inf) ? 0.0 : gmax - gmin;
        if (violation <= tol || j < 0) return {alpha, iter, std::max(violation, 0.0)};

        double quad = k(i, i) + k(j, j) - 2 * k(i, j);
        if (quad <= 0) quad = kTau;
        double step = (gmax - (-y[j] * grad[j])) / quad;
        const double hi_i = y[i] > 0 ? c_penalty - alpha[i] : alpha[i];
        const double hi_j = y[j] > 0 ? alpha[j] : c_penalty - alpha[j];
        step = std::min({step, hi_i, hi_j});

        alpha[i] += y[i] * step;
        alpha[j] -= y[j] * step;
        if (step == hi_i) alpha[i] = y[i] > 0 ? c_penalty : 0.0;
        if (step == hi_j) alpha[j] = y[j] > 0 ? 0.0 : c_penalty;
        for (Index t = 0; t < n; ++t) grad[t] += y[t] * step * (k(t, i) - k(t, j));
    }
    throw SolverError("SVM dual did not converge within " + std::to_string(max_iter) + " iterations", violation);
}

}  // namespace diproperm::solvers
