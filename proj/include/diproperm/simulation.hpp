#pragma once

#include "diproperm/baselines.hpp"
#include "diproperm/data.hpp"
#include "diproperm/directions.hpp"
#include "diproperm/permutation.hpp"
#include "diproperm/rng.hpp"
#include "diproperm/statistics.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace diproperm {

struct SphericalGaussian {
    Vector mean;
    double sigma2 = 1;
};

/// iid marginal Student t, unstandardised (variance dof / (dof - 2)).
struct IidStudentT {
    double dof = 5;
};

/// N(mean, Sigma_B) with Sigma_B block diagonal of 5 x 5 blocks, unit
/// diagonal and off-diagonal rho.
struct BlockGaussian {
    Vector mean;
    double rho = 0.2;
};

struct MixtureComponent {
    double weight = 1;
    Vector mean;
    double sigma2 = 1;
};

struct GaussianMixture {
    std::vector<MixtureComponent> components;
};

struct DistributionSpec {
    std::variant<SphericalGaussian, IidStudentT, BlockGaussian, GaussianMixture> kind;
    Index d = 1;

    /// Throws SpecError on invalid parameters.
    void validate() const;
};

inline constexpr Index kBlockSize = 5;

DistributionSpec spherical_gaussian(Index d, double mean_fill = 0, double sigma2 = 1);
DistributionSpec iid_t5(Index d);

/// count x d matrix of iid rows.
Matrix sample_distribution(const DistributionSpec& spec, Index count, Engine& stream);

enum class Setting { S1, S2, S3, Null };

Setting parse_setting(std::string_view token);
std::string_view to_string(Setting setting);

/// Mean of the second S2 sample: ceil(d/4) zeros then 1/sqrt(n).
Vector s2_mean(Index d, Index n);

/// (F1, F2) for a comparison setting. S1: N(0,I) vs t(5)^d; S2: block
/// Gaussian without/with the S2 mean shift; S3: the two four-point
/// mixtures; Null: N(0,I) for both.
std::pair<DistributionSpec, DistributionSpec> setting_pair(Setting setting, Index d, Index n);

/// Which test a power study runs.
struct TestDescriptor {
    enum class Kind { DiProPerm, Energy, RP, Hotelling };
    Kind kind = Kind::DiProPerm;
    DirectionMethod direction = DirectionMethod::MD;
    StatKind stat = StatKind::MeanDiff;

    /// "md-md", "dwd-t", "md-smd", ..., or "energy", "rp", "hotelling".
    static TestDescriptor parse(std::string_view token);
    std::string name() const;
};

struct PowerEstimate {
    std::optional<double> mu1;       ///< set for power-surface points
    std::optional<double> sigma1sq;  ///< set for power-surface points
    Index d = 0;
    std::size_t rejections = 0;
    std::size_t mc_reps = 0;
    double rejection_rate = 0;
    double standard_error = 0;  ///< binomial
    std::string test;
};

struct PowerOptions {
    Index m = 50;
    Index n = 50;
    double alpha = 0.05;
    std::size_t mc_reps = 200;
    std::size_t b_perms = 100;
    RngPolicy rng{0};
    unsigned workers = 1;
    SolverOptions solver;
};

/// Draws mc_reps independent datasets (replicate r uses opts.rng.derive(r))
/// and reports the fraction on which each test rejects at alpha. All tests
/// see the same datasets; DiProPerm tests sharing a direction share their fits.
std::vector<PowerEstimate> estimate_power(const DistributionSpec& f1, const DistributionSpec& f2,
                                          std::span<const TestDescriptor> tests, const PowerOptions& opts);

PowerEstimate estimate_power(const DistributionSpec& f1, const DistributionSpec& f2, const TestDescriptor& test,
                             const PowerOptions& opts);

struct PowerGrid {
    std::vector<double> mu1;
    std::vector<double> sigma1sq;
    Index d = 500;
    std::vector<TestDescriptor> tests;
};

/// F1 = N(mu1 * 1, sigma1sq I_d), F2 = N(0, I_d) at every grid point.
std::vector<PowerEstimate> power_surface(const PowerGrid& grid, const PowerOptions& opts);

struct ScalingRow {
    Index d = 0;
    double median_s_over_d = 0;       ///< median S(Z)/d
    double median_perm_s_over_d = 0;  ///< median S(Z_pi)/d
    double median_t_observed = 0;     ///< median MD-t on the original labels
    double median_t_perm = 0;         ///< median MD-t over all relabelings
    double frac_exceeds_max = 0;      ///< share of reps where observed MD-t > every permuted one
};

struct ScalingOptions {
    Index m = 50;
    Index n = 50;
    double sigma_x2 = 1;
    double sigma_y2 = 100;
    std::size_t reps = 50;
    std::size_t b_perms = 100;
    RngPolicy rng{0};
    unsigned workers = 1;
};

/// Growth of the MD-t denominator with dimension. S uses the unnormalised
/// mean-difference direction, so it carries the factor ||X_bar - Y_bar||^2.
std::vector<ScalingRow> scaling_diagnostic(std::span<const Index> dims, const ScalingOptions& opts);

/// sqrt((sx2 + sy2) d): leading-order distance between independent
/// N(0, sx2 I) and N(0, sy2 I) draws.
double expected_pair_distance(double sigma_x2, double sigma_y2, Index d);

/// Tab-separated power table with header
/// mu1 sigma1sq d rejection_rate stderr test m n alpha reps seed
std::string power_tsv(std::span<const PowerEstimate> rows, const PowerOptions& opts);

std::string scaling_tsv(std::span<const ScalingRow> rows);

}  // namespace diproperm
