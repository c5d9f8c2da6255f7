#include "diproperm/statistics.hpp"

#include "diproperm/error.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numeric>

namespace diproperm {

namespace {

constexpr std::array<std::pair<StatKind, std::string_view>, 7> kNames{{
    {StatKind::MeanDiff, "md"},
    {StatKind::WelchT, "t"},
    {StatKind::ScaledMeanDiff, "smd"},
    {StatKind::MedianDiff, "med"},
    {StatKind::MedianOverMAD, "medmad"},
    {StatKind::AUC, "auc"},
    {StatKind::PairedT, "pairt"},
}};

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size()); }

double unbiased_var(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss / double(v.size() - 1);
}

void require_nonempty(const ProjectionSummary& ps) {
    if (ps.px.empty() || ps.py.empty()) throw InvalidArgument("statistic needs nonempty projections");
}

}  // namespace

std::string_view to_string(StatKind kind) {
    for (const auto& [k, name] : kNames)
        if (k == kind) return name;
    return "?";
}

StatKind parse_stat(std::string_view token) {
    for (const auto& [k, name] : kNames)
        if (name == token) return k;
    throw InvalidArgument("unknown statistic '" + std::string(token) + "'");
}

double median(std::vector<double> values) {
    if (values.empty()) throw InvalidArgument("median of an empty set");
    const auto mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

ProjectionSummary summarize(std::vector<double> px, std::vector<double> py) {
    ProjectionSummary ps;
    ps.px = std::move(px);
    ps.py = std::move(py);
    if (ps.px.empty() || ps.py.empty()) return ps;
    ps.mean_x = mean_of(ps.px);
    ps.mean_y = mean_of(ps.py);
    ps.var_x = unbiased_var(ps.px, ps.mean_x);
    ps.var_y = unbiased_var(ps.py, ps.mean_y);
    ps.t_value = ps.mean_x - ps.mean_y;
    ps.s_value = ps.var_x / double(ps.px.size()) + ps.var_y / double(ps.py.size());
    return ps;
}

ProjectionSummary project(const SamplePair& sp, const DirectionVector& w) {
    if (w.w.size() != sp.d()) throw InvalidArgument("direction length does not match the data dimension");
    const Vector px = sp.x() * w.w;
    const Vector py = sp.y() * w.w;
    return summarize(std::vector<double>(px.begin(), px.end()), std::vector<double>(py.begin(), py.end()));
}

double stat_mean_diff(const ProjectionSummary& ps) { return ps.mean_x - ps.mean_y; }

double stat_welch_t(const ProjectionSummary& ps) {
    if (ps.px.size() < 2 || ps.py.size() < 2) throw InvalidArgument("Welch t needs at least two observations per group");
    const double diff = ps.mean_x - ps.mean_y;
    if (ps.s_value <= 0) {
        if (diff == 0) throw ZeroVariance("Welch t: both groups constant with equal means");
        return std::copysign(std::numeric_limits<double>::infinity(), diff);
    }
    return diff / std::sqrt(ps.s_value);
}

double stat_scaled_mean_diff(const ProjectionSummary& ps, double sx2, double sy2) {
    const double denom = sx2 / double(ps.px.size()) + sy2 / double(ps.py.size());
    if (!(denom > 0)) throw ZeroVariance("scaled mean difference: zero variance estimates");
    return (ps.mean_x - ps.mean_y) / std::sqrt(denom);
}

double stat_median_diff(const ProjectionSummary& ps) {
    require_nonempty(ps);
    return median(ps.px) - median(ps.py);
}

double stat_median_over_mad(const ProjectionSummary& ps) {
    require_nonempty(ps);
    const double mx = median(ps.px);
    const double my = median(ps.py);
    std::vector<double> dev;
    dev.reserve(ps.px.size() + ps.py.size());
    for (double v : ps.px) dev.push_back(std::abs(v - mx));
    for (double v : ps.py) dev.push_back(std::abs(v - my));
    const double mad = median(std::move(dev));
    if (!(mad > 0)) throw ZeroVariance("median absolute deviation is zero");
    return (mx - my) / mad;
}

double stat_auc(const ProjectionSummary& ps) {
    require_nonempty(ps);
    // Sort-based count of pairs: for each x, #y below plus half the ties.
    std::vector<double> ys = ps.py;
    std::sort(ys.begin(), ys.end());
    double wins = 0;
    for (double x : ps.px) {
        const auto lo = std::lower_bound(ys.begin(), ys.end(), x);
        const auto hi = std::upper_bound(lo, ys.end(), x);
        wins += double(lo - ys.begin()) + 0.5 * double(hi - lo);
    }
    return wins / (double(ps.px.size()) * double(ps.py.size()));
}

double stat_paired_t(const ProjectionSummary& ps) {
    if (ps.px.size() != ps.py.size())
        throw PairingError("paired t needs equal group sizes (m=" + std::to_string(ps.px.size()) +
                           ", n=" + std::to_string(ps.py.size()) + ")");
    if (ps.px.size() < 2) throw InvalidArgument("paired t needs at least two pairs");
    std::vector<double> diff(ps.px.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = ps.px[i] - ps.py[i];
    const double mean = mean_of(diff);
    const double sd = std::sqrt(unbiased_var(diff, mean));
    if (!(sd > 0)) throw ZeroVariance("paired differences are constant");
    return mean / (sd / std::sqrt(double(diff.size())));
}

std::pair<double, double> per_coordinate_variances(const SamplePair& sp) {
    auto one = [&](const Matrix& a) {
        if (a.rows() < 2) return 0.0;
        const Matrix c = a.rowwise() - a.colwise().mean();
        return c.squaredNorm() / (double(a.rows() - 1) * double(a.cols()));
    };
    return {one(sp.x()), one(sp.y())};
}

double compute_stat(StatKind kind, const ProjectionSummary& ps, double sx2, double sy2) {
    switch (kind) {
        case StatKind::MeanDiff: return stat_mean_diff(ps);
        case StatKind::WelchT: return stat_welch_t(ps);
        case StatKind::ScaledMeanDiff: return stat_scaled_mean_diff(ps, sx2, sy2);
        case StatKind::MedianDiff: return stat_median_diff(ps);
        case StatKind::MedianOverMAD: return stat_median_over_mad(ps);
        case StatKind::AUC: return stat_auc(ps);
        case StatKind::PairedT: return stat_paired_t(ps);
    }
    throw InvalidArgument("unknown statistic");
}

double evaluate(const SamplePair& sp, DirectionMethod method, StatKind stat, const SolverOptions& opts) {
    const DirectionVector w = compute_direction(sp, method, opts);
    const ProjectionSummary ps = project(sp, w);
    if (stat == StatKind::ScaledMeanDiff) {
        const auto [sx2, sy2] = per_coordinate_variances(sp);
        return stat_scaled_mean_diff(ps, sx2, sy2);
    }
    return compute_stat(stat, ps);
}

}  // namespace diproperm
