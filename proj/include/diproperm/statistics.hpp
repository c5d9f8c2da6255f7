#pragma once

#include "diproperm/data.hpp"
#include "diproperm/directions.hpp"

#include <cmath>
#include <string_view>
#include <vector>

namespace diproperm {

/// Projected values of both groups and their moments.
struct ProjectionSummary {
    std::vector<double> px;
    std::vector<double> py;
    double mean_x = 0;
    double mean_y = 0;
    double var_x = 0;    ///< unbiased; 0 when m == 1
    double var_y = 0;    ///< unbiased; 0 when n == 1
    double t_value = 0;  ///< mean_x - mean_y
    double s_value = 0;  ///< var_x / m + var_y / n
};

ProjectionSummary summarize(std::vector<double> px, std::vector<double> py);

enum class StatKind { MeanDiff, WelchT, ScaledMeanDiff, MedianDiff, MedianOverMAD, AUC, PairedT };

std::string_view to_string(StatKind kind);
/// Parses the CLI token ("md", "t", "smd", "med", "medmad", "auc", "pairt").
StatKind parse_stat(std::string_view token);

ProjectionSummary project(const SamplePair& sp, const DirectionVector& w);

double stat_mean_diff(const ProjectionSummary& ps);

/// Welch two-sample t. With both variances zero and distinct means the
/// result is an infinite sentinel carrying the sign of mean_x - mean_y.
double stat_welch_t(const ProjectionSummary& ps);

/// T / sqrt(sx2/m + sy2/n) with sx2, sy2 per-coordinate variance estimates of
/// the raw d-dimensional samples.
double stat_scaled_mean_diff(const ProjectionSummary& ps, double sx2, double sy2);

double stat_median_diff(const ProjectionSummary& ps);

/// Median difference over the median of the pooled absolute deviations of
/// each group about its own median (no consistency factor).
double stat_median_over_mad(const ProjectionSummary& ps);

/// Mann-Whitney AUC with X as the positive class, ties counted 1/2.
double stat_auc(const ProjectionSummary& ps);

/// One-sample t of px_i - py_i (requires m == n >= 2).
double stat_paired_t(const ProjectionSummary& ps);

/// True for the infinite sentinel returned on perfectly separated, zero-variance data.
inline bool is_degenerate_stat(double value) { return std::isinf(value); }

/// trace(S_X)/d and trace(S_Y)/d from the raw samples.
std::pair<double, double> per_coordinate_variances(const SamplePair& sp);

/// Dispatches one statistic; sx2/sy2 are only read by ScaledMeanDiff.
double compute_stat(StatKind kind, const ProjectionSummary& ps, double sx2 = 0, double sy2 = 0);

/// Direction -> projection -> statistic on the given labels.
double evaluate(const SamplePair& sp, DirectionMethod method, StatKind stat, const SolverOptions& opts = {});

double median(std::vector<double> values);

}  // namespace diproperm
