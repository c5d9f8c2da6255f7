#pragma once

#include "diproperm/data.hpp"
#include "diproperm/permutation.hpp"
#include "diproperm/rng.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string_view>

namespace diproperm {

struct EnergyResult {
    double statistic = 0;
    double empirical_p = 1;
    std::size_t b_perms = 0;
    std::vector<double> perm_stats;
    std::uint64_t seed = 0;
};

/// (mn/N) [ 2/(mn) sum ||X_i - Y_j|| - 1/m^2 sum ||X_i - X_j|| - 1/n^2 sum ||Y_i - Y_j|| ].
double energy_statistic(const SamplePair& sp);

/// Energy statistic with a permutation p-value from the shared engine.
EnergyResult energy_test(const SamplePair& sp, const PermutationPlan& plan);

struct HotellingResult {
    double t2 = 0;
    double f_stat = 0;
    Index df1 = 0;
    Index df2 = 0;
    double p_value = 1;
};

/// Classical two-sample Hotelling T^2 with pooled covariance W / (N - 2).
/// Requires d <= N - 2 and a nonsingular pooled covariance.
HotellingResult hotelling_t2(const SamplePair& sp);

struct RPConfig {
    /// Projected dimension; unset means floor(min(m, n) / 2).
    std::optional<Index> k;
    RngPolicy rng{0};
};

/// Random-projection Hotelling test: one k x d matrix of iid N(0,1) entries
/// drawn from cfg.rng.stream(0), then Hotelling T^2 on the projected data.
HotellingResult rp_test(const SamplePair& sp, const RPConfig& cfg);

/// Hotelling T^2 on the data mapped through an explicit k x d matrix.
HotellingResult rp_test_with_projection(const SamplePair& sp, const Matrix& projection);

Index rp_dimension(const SamplePair& sp, const RPConfig& cfg);

nlohmann::json to_json(const EnergyResult& result, std::optional<std::size_t> max_perm_stats = {});
nlohmann::json to_json(const HotellingResult& result, std::string_view method, std::uint64_t seed);

}  // namespace diproperm
