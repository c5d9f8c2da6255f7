#include "diproperm/permutation.hpp"

#include "diproperm/error.hpp"
#include "diproperm/gram.hpp"
#include "diproperm/parallel.hpp"

#include <cmath>
#include <numeric>

namespace diproperm {

PooledSample permute_labels(const PooledSample& pooled, Engine& stream) {
    const auto order = draw_permutation(static_cast<std::size_t>(pooled.total()), stream);
    PooledSample out;
    out.z_rows.resize(pooled.total(), pooled.d());
    for (Index i = 0; i < pooled.total(); ++i) out.z_rows.row(i) = pooled.z_rows.row(static_cast<Index>(order[i]));
    out.split_m = pooled.split_m;
    out.label_x = pooled.label_x;
    out.label_y = pooled.label_y;
    return out;
}

double empirical_pvalue(double observed, std::span<const double> perm_stats, bool smoothed) {
    if (perm_stats.empty()) throw InvalidArgument("no permutation statistics");
    std::size_t exceed = 0;
    for (double s : perm_stats) exceed += s > observed ? 1 : 0;
    if (smoothed) return double(exceed + 1) / double(perm_stats.size() + 1);
    return double(exceed) / double(perm_stats.size());
}

double z_score(double observed, std::span<const double> perm_stats) {
    if (perm_stats.size() < 2) throw DegenerateNull("Gaussian fit needs at least two permutation statistics");
    const double n = double(perm_stats.size());
    const double mean = std::accumulate(perm_stats.begin(), perm_stats.end(), 0.0) / n;
    double ss = 0;
    for (double s : perm_stats) ss += (s - mean) * (s - mean);
    const double sd = std::sqrt(ss / (n - 1));
    if (!(sd > 0) || !std::isfinite(sd)) throw DegenerateNull("permutation statistics have no spread");
    return (observed - mean) / sd;
}

double gaussian_fit_pvalue(double observed, std::span<const double> perm_stats) {
    return 0.5 * std::erfc(z_score(observed, perm_stats) / std::sqrt(2.0));
}

std::vector<double> permutation_distribution(std::size_t total, const PermutationPlan& plan,
                                             const std::function<double(std::span<const std::size_t>)>& stat) {
    if (plan.b_perms < 1) throw InvalidArgument("need at least one permutation");
    std::vector<double> out(plan.b_perms + 1);
    std::vector<std::size_t> identity(total);
    std::iota(identity.begin(), identity.end(), std::size_t{0});
    out[0] = stat(identity);
    parallel_for(plan.b_perms, plan.workers, [&](std::size_t k) {
        Engine stream = plan.rng.stream(k);
        const auto order = draw_permutation(total, stream);
        out[k + 1] = stat(order);
    });
    return out;
}

namespace {

struct WorldStats {
    std::vector<double> values;
    bool degenerate = false;
    ProjectionSummary projections;
};

WorldStats evaluate_world(const gram::PooledGram& g, DirectionMethod direction, std::span<const StatKind> stats,
                          const SolverOptions& opts, bool keep_projections, bool allow_degenerate) {
    WorldStats out;
    gram::Fit f;
    try {
        f = gram::fit(g, direction, opts);
    } catch (const DegenerateDirection&) {
        if (!allow_degenerate) throw;
        out.values.assign(stats.size(), 0.0);
        out.degenerate = true;
        return out;
    }
    const Index m = g.split_m;
    const Index n = g.total() - m;
    std::vector<double> px(static_cast<std::size_t>(m)), py(static_cast<std::size_t>(n));
    for (Index i = 0; i < m; ++i) px[static_cast<std::size_t>(i)] = f.centered[i] + f.offset;
    for (Index j = 0; j < n; ++j) py[static_cast<std::size_t>(j)] = f.centered[m + j] + f.offset;
    ProjectionSummary ps = summarize(std::move(px), std::move(py));

    std::pair<double, double> variances{0, 0};
    for (StatKind s : stats)
        if (s == StatKind::ScaledMeanDiff) variances = gram::per_coordinate_variances(g);
    out.values.reserve(stats.size());
    for (StatKind s : stats) out.values.push_back(compute_stat(s, ps, variances.first, variances.second));
    if (keep_projections) out.projections = std::move(ps);
    return out;
}

}  // namespace

std::vector<PermutationResult> run_diproperm_multi(const SamplePair& sp, DirectionMethod direction,
                                                   std::span<const StatKind> stats, const PermutationPlan& plan,
                                                   const SolverOptions& opts) {
    if (plan.b_perms < 1) throw InvalidArgument("need at least one permutation");
    if (stats.empty()) throw InvalidArgument("no statistics requested");
    const gram::PooledGram base = gram::make(pool(sp));
    const auto total = static_cast<std::size_t>(sp.total());

    const WorldStats observed = evaluate_world(base, direction, stats, opts, plan.keep_projections, false);
    std::vector<WorldStats> worlds(plan.b_perms);
    parallel_for(plan.b_perms, plan.workers, [&](std::size_t k) {
        Engine stream = plan.rng.stream(k);
        const auto order = draw_permutation(total, stream);
        try {
            worlds[k] = evaluate_world(gram::reorder(base, order), direction, stats, opts, plan.keep_projections, true);
        } catch (const Error& e) {
            std::rethrow_exception(e.with_context("replicate " + std::to_string(k) + ": "));
        }
    });

    std::vector<PermutationResult> results(stats.size());
    for (std::size_t s = 0; s < stats.size(); ++s) {
        PermutationResult& r = results[s];
        r.direction_method = direction;
        r.stat_kind = stats[s];
        r.seed = plan.rng.master_seed();
        r.observed = observed.values[s];
        r.perm_stats.reserve(plan.b_perms);
        for (const auto& w : worlds) {
            r.perm_stats.push_back(w.values[s]);
            r.degenerate_replicates += w.degenerate ? 1 : 0;
        }
        r.empirical_p = empirical_pvalue(r.observed, r.perm_stats, plan.smoothed_p);
        try {
            r.z_score = z_score(r.observed, r.perm_stats);
            r.gauss_p = 0.5 * std::erfc(*r.z_score / std::sqrt(2.0));
            if (!std::isfinite(*r.z_score)) {
                r.z_score.reset();
                r.gauss_p.reset();
            }
        } catch (const DegenerateNull&) {
        }
        if (plan.keep_projections) {
            r.projections.reserve(plan.b_perms + 1);
            r.projections.push_back(observed.projections);
            for (const auto& w : worlds) r.projections.push_back(w.projections);
        }
    }
    return results;
}

PermutationResult run_diproperm(const SamplePair& sp, DirectionMethod direction, StatKind stat,
                                const PermutationPlan& plan, const SolverOptions& opts) {
    const StatKind stats[] = {stat};
    return std::move(run_diproperm_multi(sp, direction, stats, plan, opts).front());
}

nlohmann::json to_json(const PermutationResult& result, std::optional<std::size_t> max_perm_stats) {
    nlohmann::json j;
    j["method"] = std::string(to_string(result.direction_method));
    j["stat"] = std::string(to_string(result.stat_kind));
    j["observed"] = result.observed;
    j["empirical_p"] = result.empirical_p;
    j["gauss_p"] = result.gauss_p ? nlohmann::json(*result.gauss_p) : nlohmann::json(nullptr);
    j["z"] = result.z_score ? nlohmann::json(*result.z_score) : nlohmann::json(nullptr);
    j["b_perms"] = result.perm_stats.size();
    j["seed"] = result.seed;
    j["degenerate_replicates"] = result.degenerate_replicates;
    const std::size_t keep = std::min(result.perm_stats.size(), max_perm_stats.value_or(result.perm_stats.size()));
    j["perm_stats"] = std::vector<double>(result.perm_stats.begin(), result.perm_stats.begin() + static_cast<std::ptrdiff_t>(keep));
    return j;
}

}  // namespace diproperm
