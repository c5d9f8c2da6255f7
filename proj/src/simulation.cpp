#include "diproperm/simulation.hpp"

#include "diproperm/error.hpp"
#include "diproperm/gram.hpp"
#include "diproperm/parallel.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

namespace diproperm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_mean(const Vector& mean, Index d, const char* what) {
    if (mean.size() != d)
        throw SpecError(std::string(what) + " mean has length " + std::to_string(mean.size()) + ", expected " +
                        std::to_string(d));
    if (!mean.allFinite()) throw SpecError(std::string(what) + " mean must be finite");
}

void check_sigma2(double sigma2) {
    if (!(sigma2 > 0) || !std::isfinite(sigma2)) throw SpecError("variance must be positive and finite");
}

Matrix block_factor(double rho) {
    Matrix b = Matrix::Constant(kBlockSize, kBlockSize, rho);
    b.diagonal().setOnes();
    Eigen::LLT<Matrix> llt(b);
    if (llt.info() != Eigen::Success) throw SpecError("block correlation matrix is not positive definite");
    return llt.matrixL();
}

}  // namespace

void DistributionSpec::validate() const {
    if (d < 1) throw SpecError("dimension must be at least 1");
    std::visit(overloaded{
                   [&](const SphericalGaussian& g) {
                       check_mean(g.mean, d, "spherical Gaussian");
                       check_sigma2(g.sigma2);
                   },
                   [&](const IidStudentT& t) {
                       if (!(t.dof > 0) || !std::isfinite(t.dof)) throw SpecError("t degrees of freedom must be positive");
                   },
                   [&](const BlockGaussian& b) {
                       if (d % kBlockSize != 0)
                           throw SpecError("block Gaussian needs d divisible by 5 (d = " + std::to_string(d) + ")");
                       check_mean(b.mean, d, "block Gaussian");
                       block_factor(b.rho);
                   },
                   [&](const GaussianMixture& mix) {
                       if (mix.components.empty()) throw SpecError("mixture has no components");
                       double total = 0;
                       for (const auto& c : mix.components) {
                           if (!(c.weight > 0)) throw SpecError("mixture weights must be positive");
                           check_mean(c.mean, d, "mixture component");
                           check_sigma2(c.sigma2);
                           total += c.weight;
                       }
                       if (std::abs(total - 1) > 1e-9) throw SpecError("mixture weights must sum to 1");
                   },
               },
               kind);
}

DistributionSpec spherical_gaussian(Index d, double mean_fill, double sigma2) {
    return DistributionSpec{SphericalGaussian{Vector::Constant(d, mean_fill), sigma2}, d};
}

DistributionSpec iid_t5(Index d) { return DistributionSpec{IidStudentT{5}, d}; }

Matrix sample_distribution(const DistributionSpec& spec, Index count, Engine& stream) {
    spec.validate();
    if (count < 0) throw InvalidArgument("sample count must be non-negative");
    const Index d = spec.d;
    Matrix out(count, d);
    std::normal_distribution<double> normal;
    std::visit(overloaded{
                   [&](const SphericalGaussian& g) {
                       const double sd = std::sqrt(g.sigma2);
                       for (Index i = 0; i < count; ++i)
                           for (Index j = 0; j < d; ++j) out(i, j) = g.mean[j] + sd * normal(stream);
                   },
                   [&](const IidStudentT& t) {
                       std::student_t_distribution<double> student(t.dof);
                       for (Index i = 0; i < count; ++i)
                           for (Index j = 0; j < d; ++j) out(i, j) = student(stream);
                   },
                   [&](const BlockGaussian& b) {
                       const Matrix l = block_factor(b.rho);
                       Vector z(kBlockSize);
                       for (Index i = 0; i < count; ++i)
                           for (Index start = 0; start < d; start += kBlockSize) {
                               for (Index k = 0; k < kBlockSize; ++k) z[k] = normal(stream);
                               out.row(i).segment(start, kBlockSize) =
                                   (b.mean.segment(start, kBlockSize) + l * z).transpose();
                           }
                   },
                   [&](const GaussianMixture& mix) {
                       std::uniform_real_distribution<double> unif(0.0, 1.0);
                       for (Index i = 0; i < count; ++i) {
                           const double u = unif(stream);
                           std::size_t c = 0;
                           double cum = mix.components[0].weight;
                           while (u >= cum && c + 1 < mix.components.size()) cum += mix.components[++c].weight;
                           const auto& comp = mix.components[c];
                           const double sd = std::sqrt(comp.sigma2);
                           for (Index j = 0; j < d; ++j) out(i, j) = comp.mean[j] + sd * normal(stream);
                       }
                   },
               },
               spec.kind);
    return out;
}

Setting parse_setting(std::string_view token) {
    std::string t(token);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (t == "s1") return Setting::S1;
    if (t == "s2") return Setting::S2;
    if (t == "s3") return Setting::S3;
    if (t == "null") return Setting::Null;
    throw InvalidArgument("unknown setting '" + std::string(token) + "' (expected s1, s2, s3 or null)");
}

std::string_view to_string(Setting setting) {
    switch (setting) {
        case Setting::S1: return "s1";
        case Setting::S2: return "s2";
        case Setting::S3: return "s3";
        case Setting::Null: return "null";
    }
    return "?";
}

Vector s2_mean(Index d, Index n) {
    if (n < 1) throw InvalidArgument("n must be positive");
    Vector mu = Vector::Constant(d, 1.0 / std::sqrt(double(n)));
    mu.head((d + 3) / 4).setZero();
    return mu;
}

namespace {

GaussianMixture four_point_mixture(Index d, double first, double second_a, double second_b) {
    if (d < 2) throw SpecError("mixture setting needs d >= 2");
    GaussianMixture mix;
    for (double second : {second_a, second_b}) {
        Vector mean = Vector::Zero(d);
        mean[0] = first;
        mean[1] = second;
        mix.components.push_back({0.5, mean, 1.0});
    }
    return mix;
}

}  // namespace

std::pair<DistributionSpec, DistributionSpec> setting_pair(Setting setting, Index d, Index n) {
    switch (setting) {
        case Setting::S1: return {spherical_gaussian(d), iid_t5(d)};
        case Setting::S2: {
            DistributionSpec f1{BlockGaussian{Vector::Zero(d), 0.2}, d};
            DistributionSpec f2{BlockGaussian{s2_mean(d, n), 0.2}, d};
            f1.validate();
            return {f1, f2};
        }
        case Setting::S3:
            return {DistributionSpec{four_point_mixture(d, 3, 30, -30), d},
                    DistributionSpec{four_point_mixture(d, -3, 30, -30), d}};
        case Setting::Null: return {spherical_gaussian(d), spherical_gaussian(d)};
    }
    throw InvalidArgument("unknown setting");
}

TestDescriptor TestDescriptor::parse(std::string_view token) {
    TestDescriptor t;
    if (token == "energy") {
        t.kind = Kind::Energy;
        return t;
    }
    if (token == "rp") {
        t.kind = Kind::RP;
        return t;
    }
    if (token == "hotelling") {
        t.kind = Kind::Hotelling;
        return t;
    }
    const auto dash = token.find('-');
    if (dash == std::string_view::npos)
        throw InvalidArgument("test '" + std::string(token) + "' must be direction-stat, energy, rp or hotelling");
    t.direction = parse_direction(token.substr(0, dash));
    t.stat = parse_stat(token.substr(dash + 1));
    return t;
}

std::string TestDescriptor::name() const {
    switch (kind) {
        case Kind::Energy: return "energy";
        case Kind::RP: return "rp";
        case Kind::Hotelling: return "hotelling";
        case Kind::DiProPerm: break;
    }
    return std::string(to_string(direction)) + "-" + std::string(to_string(stat));
}

namespace {

// One dataset, every requested test; returns a reject flag per test.
std::vector<char> run_tests_once(const SamplePair& sp, std::span<const TestDescriptor> tests,
                                 const PowerOptions& opts, const RngPolicy& rep_rng) {
    std::vector<char> reject(tests.size(), 0);
    PermutationPlan plan;
    plan.b_perms = opts.b_perms;
    plan.rng = rep_rng.derive(2);
    plan.workers = 1;

    std::map<DirectionMethod, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < tests.size(); ++i)
        if (tests[i].kind == TestDescriptor::Kind::DiProPerm) groups[tests[i].direction].push_back(i);
    for (const auto& [direction, members] : groups) {
        std::vector<StatKind> stats;
        for (std::size_t i : members) stats.push_back(tests[i].stat);
        const auto results = run_diproperm_multi(sp, direction, stats, plan, opts.solver);
        for (std::size_t k = 0; k < members.size(); ++k) reject[members[k]] = results[k].reject(opts.alpha);
    }
    for (std::size_t i = 0; i < tests.size(); ++i) {
        switch (tests[i].kind) {
            case TestDescriptor::Kind::Energy:
                reject[i] = energy_test(sp, plan).empirical_p < opts.alpha;
                break;
            case TestDescriptor::Kind::RP:
                reject[i] = rp_test(sp, RPConfig{std::nullopt, rep_rng.derive(3)}).p_value < opts.alpha;
                break;
            case TestDescriptor::Kind::Hotelling:
                reject[i] = hotelling_t2(sp).p_value < opts.alpha;
                break;
            case TestDescriptor::Kind::DiProPerm: break;
        }
    }
    return reject;
}

}  // namespace

std::vector<PowerEstimate> estimate_power(const DistributionSpec& f1, const DistributionSpec& f2,
                                          std::span<const TestDescriptor> tests, const PowerOptions& opts) {
    f1.validate();
    f2.validate();
    if (f1.d != f2.d) throw SpecError("the two distributions must share a dimension");
    if (!(opts.alpha > 0 && opts.alpha < 1)) throw InvalidArgument("alpha must lie in (0, 1)");
    if (opts.mc_reps < 1) throw InvalidArgument("need at least one Monte Carlo replicate");
    if (opts.m < 1 || opts.n < 1) throw InvalidArgument("group sizes must be positive");
    if (tests.empty()) throw InvalidArgument("no tests requested");

    std::vector<std::vector<char>> flags(opts.mc_reps);
    parallel_for(opts.mc_reps, opts.workers, [&](std::size_t r) {
        const RngPolicy rep_rng = opts.rng.derive(r);
        try {
            Engine sx = rep_rng.stream(0);
            Engine sy = rep_rng.stream(1);
            SamplePair sp(sample_distribution(f1, opts.m, sx), sample_distribution(f2, opts.n, sy));
            flags[r] = run_tests_once(sp, tests, opts, rep_rng);
        } catch (const Error& e) {
            std::rethrow_exception(e.with_context("Monte Carlo replicate " + std::to_string(r) + ": "));
        }
    });

    std::vector<PowerEstimate> out(tests.size());
    for (std::size_t i = 0; i < tests.size(); ++i) {
        PowerEstimate& p = out[i];
        p.d = f1.d;
        p.mc_reps = opts.mc_reps;
        for (const auto& f : flags) p.rejections += f[i] ? 1 : 0;
        p.rejection_rate = double(p.rejections) / double(p.mc_reps);
        p.standard_error = std::sqrt(p.rejection_rate * (1 - p.rejection_rate) / double(p.mc_reps));
        p.test = tests[i].name();
    }
    return out;
}

PowerEstimate estimate_power(const DistributionSpec& f1, const DistributionSpec& f2, const TestDescriptor& test,
                             const PowerOptions& opts) {
    return estimate_power(f1, f2, std::span<const TestDescriptor>(&test, 1), opts).front();
}

std::vector<PowerEstimate> power_surface(const PowerGrid& grid, const PowerOptions& opts) {
    std::vector<PowerEstimate> out;
    std::uint64_t point = 0;
    for (double mu1 : grid.mu1)
        for (double s1 : grid.sigma1sq) {
            PowerOptions o = opts;
            o.rng = opts.rng.derive(point++);
            auto rows = estimate_power(spherical_gaussian(grid.d, mu1, s1), spherical_gaussian(grid.d), grid.tests, o);
            for (auto& r : rows) {
                r.mu1 = mu1;
                r.sigma1sq = s1;
                out.push_back(std::move(r));
            }
        }
    return out;
}

double expected_pair_distance(double sigma_x2, double sigma_y2, Index d) {
    if (!(sigma_x2 > 0) || !(sigma_y2 > 0)) throw InvalidArgument("variances must be positive");
    return std::sqrt((sigma_x2 + sigma_y2) * double(d));
}

namespace {

struct ScalingWorld {
    double s = 0;
    double t = 0;
};

// S and MD-t with the unnormalised mean-difference direction w = X_bar - Y_bar.
ScalingWorld md_scaling_world(const gram::PooledGram& g) {
    const Vector c = gram::contrast(g.total(), g.split_m);
    const Vector proj = g.k * c;
    const Index m = g.split_m, n = g.total() - m;
    const double mx = proj.head(m).mean(), my = proj.tail(n).mean();
    const double vx = m > 1 ? (proj.head(m).array() - mx).square().sum() / double(m - 1) : 0.0;
    const double vy = n > 1 ? (proj.tail(n).array() - my).square().sum() / double(n - 1) : 0.0;
    ScalingWorld w;
    w.s = vx / double(m) + vy / double(n);
    w.t = (mx - my) / std::sqrt(w.s);
    return w;
}

}  // namespace

std::vector<ScalingRow> scaling_diagnostic(std::span<const Index> dims, const ScalingOptions& opts) {
    if (opts.m < 2 || opts.n < 2) throw InvalidArgument("scaling diagnostic needs at least two observations per group");
    if (opts.reps < 1 || opts.b_perms < 1) throw InvalidArgument("reps and b_perms must be positive");
    std::vector<ScalingRow> rows;
    for (std::size_t di = 0; di < dims.size(); ++di) {
        const Index d = dims[di];
        if (d < 1) throw InvalidArgument("dimensions must be positive");
        const RngPolicy dim_rng = opts.rng.derive(di);
        std::vector<ScalingWorld> observed(opts.reps);
        std::vector<std::vector<ScalingWorld>> permuted(opts.reps);
        parallel_for(opts.reps, opts.workers, [&](std::size_t r) {
            const RngPolicy rep_rng = dim_rng.derive(r);
            Engine sx = rep_rng.stream(0), sy = rep_rng.stream(1);
            SamplePair sp(sample_distribution(spherical_gaussian(d, 0, opts.sigma_x2), opts.m, sx),
                          sample_distribution(spherical_gaussian(d, 0, opts.sigma_y2), opts.n, sy));
            const gram::PooledGram g = gram::make(pool(sp));
            observed[r] = md_scaling_world(g);
            const RngPolicy perm_rng = rep_rng.derive(2);
            permuted[r].resize(opts.b_perms);
            for (std::size_t k = 0; k < opts.b_perms; ++k) {
                Engine stream = perm_rng.stream(k);
                permuted[r][k] = md_scaling_world(gram::reorder(g, draw_permutation(std::size_t(g.total()), stream)));
            }
        });
        std::vector<double> s_obs, t_obs, s_perm, t_perm;
        std::size_t exceeds = 0;
        for (std::size_t r = 0; r < opts.reps; ++r) {
            s_obs.push_back(observed[r].s / double(d));
            t_obs.push_back(observed[r].t);
            double tmax = -std::numeric_limits<double>::infinity();
            for (const auto& w : permuted[r]) {
                s_perm.push_back(w.s / double(d));
                t_perm.push_back(w.t);
                tmax = std::max(tmax, w.t);
            }
            exceeds += observed[r].t > tmax ? 1 : 0;
        }
        ScalingRow row;
        row.d = d;
        row.median_s_over_d = median(s_obs);
        row.median_perm_s_over_d = median(s_perm);
        row.median_t_observed = median(t_obs);
        row.median_t_perm = median(t_perm);
        row.frac_exceeds_max = double(exceeds) / double(opts.reps);
        rows.push_back(row);
    }
    return rows;
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

}  // namespace

std::string power_tsv(std::span<const PowerEstimate> rows, const PowerOptions& opts) {
    std::ostringstream os;
    os << "mu1\tsigma1sq\td\trejection_rate\tstderr\ttest\tm\tn\talpha\treps\tseed\n";
    for (const auto& r : rows) {
        os << (r.mu1 ? fmt(*r.mu1) : "NA") << '\t' << (r.sigma1sq ? fmt(*r.sigma1sq) : "NA") << '\t' << r.d << '\t'
           << fmt(r.rejection_rate) << '\t' << fmt(r.standard_error) << '\t' << r.test << '\t' << opts.m << '\t'
           << opts.n << '\t' << fmt(opts.alpha) << '\t' << r.mc_reps << '\t' << opts.rng.master_seed() << '\n';
    }
    return os.str();
}

std::string scaling_tsv(std::span<const ScalingRow> rows) {
    std::ostringstream os;
    os << "d\tmedian_s_over_d\tmedian_perm_s_over_d\tmedian_t_observed\tmedian_t_perm\tfrac_exceeds_max\n";
    for (const auto& r : rows)
        os << r.d << '\t' << fmt(r.median_s_over_d) << '\t' << fmt(r.median_perm_s_over_d) << '\t'
           << fmt(r.median_t_observed) << '\t' << fmt(r.median_t_perm) << '\t' << fmt(r.frac_exceeds_max) << '\n';
    return os.str();
}

}  // namespace diproperm
