#pragma once

#include "diproperm/data.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace diproperm {

enum class DirectionMethod { MD, FLD, SVM, DWD, MDP };

std::string_view to_string(DirectionMethod method);
/// Parses the CLI token ("md", "fld", "svm", "dwd", "mdp").
DirectionMethod parse_direction(std::string_view token);

/// Unit normal of a separating hyperplane, oriented so that the mean
/// projection of X is at least the mean projection of Y.
struct DirectionVector {
    Vector w;
    DirectionMethod method = DirectionMethod::MD;
};

struct SolverOptions {
    /// Penalty for SVM and DWD; unset means 100 / median^2 of the
    /// between-class pairwise distances.
    std::optional<double> c_penalty;
    double tol = 1e-6;
    /// Iteration cap per unit of N; the solvers stop after max_iter_per_obs * N steps.
    long max_iter_per_obs = 100000;
};

/// Within-class scatter W, total scatter of the globally centered pooled
/// data, and the unbiased pooled covariance W / (N - 2).
struct ScatterMatrices {
    Matrix within_w;
    Matrix total_s;
    Matrix pooled_unbiased;
};

ScatterMatrices scatter_matrices(const SamplePair& sp);

/// Default SVM/DWD penalty: 100 / median^2 of the m*n distances ||X_i - Y_j||.
double default_penalty(const SamplePair& sp);

/// Relative singular value cutoff used by the pseudoinverse directions.
double pinv_rtol(Index d, Index total);

DirectionVector md_direction(const SamplePair& sp);
DirectionVector fld_direction(const SamplePair& sp);
DirectionVector svm_direction(const SamplePair& sp, const SolverOptions& opts = {});
DirectionVector dwd_direction(const SamplePair& sp, const SolverOptions& opts = {});
DirectionVector mdp_direction(const SamplePair& sp);

DirectionVector compute_direction(const SamplePair& sp, DirectionMethod method, const SolverOptions& opts = {});

/// W^+ (X_bar - Y_bar) without normalization.
Vector fld_weights(const SamplePair& sp);

/// DWD primal objective along direction w: minimised over the weight length
/// t in (0, 1], the intercept and the slacks.
double dwd_objective(const SamplePair& sp, const Vector& w, double c_penalty);

}  // namespace diproperm
