#pragma once

#include "diproperm/data.hpp"

namespace diproperm::solvers {

struct DualSolution {
    Vector alpha;
    long iterations = 0;
    double residual = 0;  ///< final KKT violation (SVM) or relative duality gap (DWD)
};

/// Soft-margin linear SVM dual by pairwise (SMO) updates with second-order
/// working set selection. `k` is the Gram matrix, `y` holds +1/-1.
/// Stops when the maximal KKT violation is <= tol.
DualSolution svm_dual(const Matrix& k, const Vector& y, double c_penalty, double tol, long max_iter);

/// DWD dual  max 2 sum sqrt(alpha_i) - ||sum alpha_i y_i x_i||
///           s.t. y'alpha = 0, 0 <= alpha <= C
/// by pairwise updates; each 1-D subproblem is solved exactly. Stops when the
/// primal-dual gap is <= tol * max(1, |dual|).
DualSolution dwd_dual(const Matrix& k, const Vector& y, double c_penalty, double tol, long max_iter);

/// DWD solved in the primal by a log-barrier Newton method on the
/// coordinates of the data span; returns c with w = sum_i c_i x_i. Used
/// when the norm constraint is inactive at the optimum, where the dual is
/// nonsmooth and pairwise ascent stalls.
Vector dwd_primal_coefficients(const Matrix& k, const Vector& y, double c_penalty, double tol, long max_newton);

/// Primal DWD objective for fixed unit-direction scores s_i = w . x_i,
/// minimised over the intercept (slacks are eliminated in closed form).
double dwd_primal(const Vector& scores, const Vector& y, double c_penalty);

}  // namespace diproperm::solvers
