#pragma once

#include "diproperm/data.hpp"
#include "diproperm/directions.hpp"
#include "diproperm/rng.hpp"
#include "diproperm/statistics.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace diproperm {

struct PermutationPlan {
    std::size_t b_perms = 1000;
    RngPolicy rng{0};
    /// Threads used for replicates; results do not depend on it.
    unsigned workers = 1;
    /// Report (count + 1) / (B + 1) instead of count / B.
    bool smoothed_p = false;
    /// Keep the projected values of every relabeling.
    bool keep_projections = false;
};

struct PermutationResult {
    double observed = 0;
    std::vector<double> perm_stats;
    double empirical_p = 1;
    /// Unset when the permutation statistics have zero or non-finite spread.
    std::optional<double> gauss_p;
    std::optional<double> z_score;
    DirectionMethod direction_method = DirectionMethod::MD;
    StatKind stat_kind = StatKind::MeanDiff;
    std::uint64_t seed = 0;
    /// Replicates whose retrained direction was degenerate (scored 0).
    std::size_t degenerate_replicates = 0;
    /// Projections on the original labels followed by each relabeling, when requested.
    std::vector<ProjectionSummary> projections;

    bool reject(double alpha) const { return empirical_p < alpha; }
};

/// Pooled rows reordered by a Fisher-Yates permutation from `stream`;
/// split_m is unchanged, so the first split_m rows become the new group X.
PooledSample permute_labels(const PooledSample& pooled, Engine& stream);

/// Fraction of permutation statistics strictly greater than observed.
double empirical_pvalue(double observed, std::span<const double> perm_stats, bool smoothed = false);
/// (observed - mean) / sd with the unbiased standard deviation.
double z_score(double observed, std::span<const double> perm_stats);
/// 1 - Phi(z).
double gaussian_fit_pvalue(double observed, std::span<const double> perm_stats);

/// Directed permutation test: fit the direction on the labels, project,
/// compute the statistic, then repeat for b_perms random relabelings.
/// Replicate k draws its relabeling from plan.rng.stream(k).
PermutationResult run_diproperm(const SamplePair& sp, DirectionMethod direction, StatKind stat,
                                const PermutationPlan& plan, const SolverOptions& opts = {});

/// Several statistics on a shared direction fit and shared relabelings.
std::vector<PermutationResult> run_diproperm_multi(const SamplePair& sp, DirectionMethod direction,
                                                   std::span<const StatKind> stats,
                                                   const PermutationPlan& plan,
                                                   const SolverOptions& opts = {});

/// Generic permutation engine over index orders: stat(order) evaluates the
/// statistic with rows order[0..split_m) as group X. Entry 0 of the returned
/// vector is the observed (identity order) value, entries 1..B the replicates.
std::vector<double> permutation_distribution(std::size_t total, const PermutationPlan& plan,
                                             const std::function<double(std::span<const std::size_t>)>& stat);

/// {method, stat, observed, empirical_p, gauss_p, z, b_perms, seed, perm_stats}.
/// perm_stats is truncated to `max_perm_stats` entries when given.
nlohmann::json to_json(const PermutationResult& result, std::optional<std::size_t> max_perm_stats = {});

}  // namespace diproperm
