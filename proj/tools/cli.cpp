#include "cli.hpp"

#include "diproperm/baselines.hpp"
#include "diproperm/data.hpp"
#include "diproperm/error.hpp"
#include "diproperm/permutation.hpp"
#include "diproperm/simulation.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace diproperm::cli {

namespace {

const std::vector<std::string> kDirections = {"md", "fld", "svm", "dwd", "mdp"};
const std::vector<std::string> kStats = {"md", "t", "smd", "med", "medmad", "auc", "pairt"};

std::string pair_listing() {
    std::ostringstream os;
    os << "Direction-statistic pairs (--direction X --stat Y, or --test X-Y):\n";
    for (const auto& d : kDirections) {
        os << " ";
        for (const auto& s : kStats) os << ' ' << d << '-' << s;
        os << '\n';
    }
    os << "Directions: md (mean difference), fld (Fisher), svm, dwd (distance weighted), mdp (maximal data piling)\n"
          "Statistics: md (mean difference), t (Welch t), smd (scaled mean difference), med (median difference),\n"
          "            medmad (median difference over MAD), auc, pairt (paired t)\n"
          "Exit status: 0 success, 2 invalid input, 3 computational failure.\n"
          "DIPROPERM_SEED supplies the seed when --seed is absent.";
    return os.str();
}

struct Common {
    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
    double alpha = 0.05;
    std::string output;
    std::string format;
};

void add_common(CLI::App* app, Common& c, const std::string& default_format) {
    c.format = default_format;
    app->add_option("--seed", c.seed, "Master seed (default: $DIPROPERM_SEED, else 0)");
    app->add_option("--workers", c.workers, "Worker threads; results do not depend on it")
        ->check(CLI::Range(1u, 1024u));
    app->add_option("--alpha", c.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
    app->add_option("--output,-o", c.output, "Write the result here instead of standard output");
    app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "tsv"}));
}

std::uint64_t resolve_seed(const Common& c) {
    if (c.seed) return *c.seed;
    if (const char* env = std::getenv("DIPROPERM_SEED")) {
        const std::string s(env);
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size() || s.front() == '-')
            throw InvalidArgument("DIPROPERM_SEED must be a non-negative integer, got '" + s + "'");
        return v;
    }
    return 0;
}

void emit(const Common& c, const std::string& text, std::ostream& out) {
    if (c.output.empty() || c.output == "-") {
        out << text;
        return;
    }
    std::ofstream f(c.output, std::ios::binary);
    if (!f) throw InvalidArgument("cannot write " + c.output);
    f << text;
    if (!f) throw InvalidArgument("failed writing " + c.output);
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string opt_fmt(const std::optional<double>& v) { return v ? fmt(*v) : "NA"; }

SamplePair read_input(const std::string& path, const LoadOptions& opts, std::istream& in) {
    if (path == "-") {
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return parse_dataset(text, opts);
    }
    return load_dataset(path, opts);
}

std::optional<std::size_t> index_token(const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
    return static_cast<std::size_t>(std::stoull(s));
}

struct DataFlags {
    std::string input;
    std::string label;
    std::string labels_file;
    std::string positive_label;
    bool transpose = false;
    std::optional<std::size_t> id_column;
};

void add_data_flags(CLI::App* app, DataFlags& f, bool required) {
    auto* opt = app->add_option("input", f.input, "Delimited data file, or - for standard input");
    if (required) opt->required();
    app->add_option("--label", f.label, "Label column: header name or 0-based index (default 0)");
    app->add_option("--labels-file", f.labels_file, "File with one label per observation");
    app->add_option("--positive-label", f.positive_label, "Label that forms group X");
    app->add_flag("--transpose", f.transpose, "Observations are stored as columns");
    app->add_option("--id-column", f.id_column, "0-based column of row identifiers to ignore");
}

LoadOptions load_options(const DataFlags& f) {
    if (!f.label.empty() && !f.labels_file.empty())
        throw InvalidArgument("--label and --labels-file are mutually exclusive");
    LoadOptions o;
    if (!f.labels_file.empty())
        o.labels = LabelFile{f.labels_file};
    else if (!f.label.empty()) {
        if (auto idx = index_token(f.label))
            o.labels = LabelColumnIndex{*idx};
        else
            o.labels = LabelColumnName{f.label};
    }
    o.transpose = f.transpose;
    if (!f.positive_label.empty()) o.positive_label = f.positive_label;
    o.id_column = f.id_column;
    return o;
}

std::vector<Index> parse_dims(const std::vector<long long>& raw) {
    std::vector<Index> dims;
    for (long long v : raw) {
        if (v < 1) throw InvalidArgument("dimensions must be positive");
        dims.push_back(static_cast<Index>(v));
    }
    return dims;
}

// ---- test -------------------------------------------------------------

struct TestArgs {
    Common common;
    DataFlags data;
    std::string direction = "md";
    std::string stat = "md";
    std::size_t nperm = 1000;
    std::string projections;
    bool smoothed = false;
    std::optional<std::size_t> max_perm_stats;
    std::optional<double> penalty;
};

std::string projections_tsv(const PermutationResult& r, const SamplePair& sp, const PermutationPlan& plan) {
    std::ostringstream os;
    os << "value\tgroup\toriginal_group\tworld\n";
    const auto total = static_cast<std::size_t>(sp.total());
    const auto m = static_cast<std::size_t>(sp.m());
    for (std::size_t w = 0; w < r.projections.size(); ++w) {
        std::vector<std::size_t> order(total);
        for (std::size_t i = 0; i < total; ++i) order[i] = i;
        std::string world = "original";
        if (w > 0) {
            Engine stream = plan.rng.stream(w - 1);
            order = draw_permutation(total, stream);
            world = "perm_" + std::to_string(w);
        }
        const auto& ps = r.projections[w];
        auto row = [&](double value, std::size_t pos) {
            const std::string& group = pos < m ? sp.label_x() : sp.label_y();
            const std::string& original = order[pos] < m ? sp.label_x() : sp.label_y();
            os << fmt(value) << '\t' << group << '\t' << original << '\t' << world << '\n';
        };
        for (std::size_t i = 0; i < ps.px.size(); ++i) row(ps.px[i], i);
        for (std::size_t j = 0; j < ps.py.size(); ++j) row(ps.py[j], m + j);
    }
    return os.str();
}

int cmd_test(const TestArgs& a, std::istream& in, std::ostream& out) {
    const LoadOptions lo = load_options(a.data);
    const DirectionMethod direction = parse_direction(a.direction);
    const StatKind stat = parse_stat(a.stat);
    if (a.nperm < 1) throw InvalidArgument("--nperm must be positive");
    PermutationPlan plan;
    plan.b_perms = a.nperm;
    plan.rng = RngPolicy(resolve_seed(a.common));
    plan.workers = a.common.workers;
    plan.smoothed_p = a.smoothed;
    plan.keep_projections = !a.projections.empty();
    SolverOptions so;
    so.c_penalty = a.penalty;

    const SamplePair sp = read_input(a.data.input, lo, in);
    const PermutationResult r = run_diproperm(sp, direction, stat, plan, so);

    if (!a.projections.empty()) {
        std::ofstream f(a.projections, std::ios::binary);
        if (!f) throw InvalidArgument("cannot write " + a.projections);
        f << projections_tsv(r, sp, plan);
    }
    if (a.common.format == "tsv") {
        std::ostringstream os;
        os << "method\tstat\tobserved\tempirical_p\tgauss_p\tz\tb_perms\tseed\treject\tlabel_x\tlabel_y\n"
           << to_string(r.direction_method) << '\t' << to_string(r.stat_kind) << '\t' << fmt(r.observed) << '\t'
           << fmt(r.empirical_p) << '\t' << opt_fmt(r.gauss_p) << '\t' << opt_fmt(r.z_score) << '\t'
           << r.perm_stats.size() << '\t' << r.seed << '\t' << (r.reject(a.common.alpha) ? 1 : 0) << '\t'
           << sp.label_x() << '\t' << sp.label_y() << '\n';
        emit(a.common, os.str(), out);
    } else {
        nlohmann::json j = to_json(r, a.max_perm_stats);
        j["alpha"] = a.common.alpha;
        j["reject"] = r.reject(a.common.alpha);
        j["m"] = sp.m();
        j["n"] = sp.n();
        j["d"] = sp.d();
        j["label_x"] = sp.label_x();
        j["label_y"] = sp.label_y();
        emit(a.common, dump(j), out);
    }
    return kExitOk;
}

// ---- power ------------------------------------------------------------

struct PowerArgs {
    Common common;
    std::string setting;
    std::vector<std::string> tests = {"md-md"};
    std::vector<long long> dims = {100};
    std::vector<double> mu1;
    std::vector<double> sigma1sq;
    long long m = 50;
    long long n = 50;
    std::size_t reps = 200;
    std::size_t nperm = 100;
    std::string emit_dataset;
};

int cmd_power(const PowerArgs& a, std::ostream& out) {
    if (a.m < 1 || a.n < 1) throw InvalidArgument("--m and --n must be positive");
    const std::vector<Index> dims = parse_dims(a.dims);
    if (dims.empty()) throw InvalidArgument("--dims needs at least one value");
    const bool surface = !a.mu1.empty() || !a.sigma1sq.empty();
    if (surface && !a.setting.empty()) throw InvalidArgument("--setting cannot be combined with --mu1/--sigma1sq");
    if (!surface && a.setting.empty()) throw InvalidArgument("power needs --setting or a --mu1/--sigma1sq grid");
    std::vector<TestDescriptor> tests;
    for (const auto& t : a.tests) tests.push_back(TestDescriptor::parse(t));

    PowerOptions po;
    po.m = a.m;
    po.n = a.n;
    po.alpha = a.common.alpha;
    po.mc_reps = a.reps;
    po.b_perms = a.nperm;
    po.rng = RngPolicy(resolve_seed(a.common));
    po.workers = a.common.workers;
    if (!(po.alpha > 0 && po.alpha < 1)) throw InvalidArgument("--alpha must lie in (0, 1)");
    if (po.mc_reps < 1 || po.b_perms < 1) throw InvalidArgument("--reps and --nperm must be positive");

    auto specs_at = [&](Index d) {
        if (surface)
            return std::pair{spherical_gaussian(d, a.mu1.empty() ? 0.0 : a.mu1.front(),
                                                a.sigma1sq.empty() ? 1.0 : a.sigma1sq.front()),
                             spherical_gaussian(d)};
        return setting_pair(parse_setting(a.setting), d, po.n);
    };

    if (!a.emit_dataset.empty()) {
        // One dataset from the first dimension, for piping into `test`.
        const auto [f1, f2] = specs_at(dims.front());
        Engine sx = po.rng.stream(0), sy = po.rng.stream(1);
        const SamplePair sp(sample_distribution(f1, po.m, sx), sample_distribution(f2, po.n, sy));
        Common c = a.common;
        c.output = a.emit_dataset;
        emit(c, to_csv(sp), out);
        return kExitOk;
    }

    std::vector<PowerEstimate> rows;
    if (surface) {
        if (dims.size() != 1) throw InvalidArgument("a --mu1/--sigma1sq grid uses a single --dims value");
        PowerGrid grid;
        grid.mu1 = a.mu1.empty() ? std::vector<double>{0.0} : a.mu1;
        grid.sigma1sq = a.sigma1sq.empty() ? std::vector<double>{1.0} : a.sigma1sq;
        for (double s : grid.sigma1sq)
            if (!(s > 0)) throw InvalidArgument("--sigma1sq values must be positive");
        grid.d = dims.front();
        grid.tests = tests;
        rows = power_surface(grid, po);
    } else {
        const Setting setting = parse_setting(a.setting);
        for (std::size_t i = 0; i < dims.size(); ++i) {
            const auto [f1, f2] = setting_pair(setting, dims[i], po.n);
            PowerOptions o = po;
            o.rng = po.rng.derive(i);
            auto part = estimate_power(f1, f2, tests, o);
            rows.insert(rows.end(), part.begin(), part.end());
        }
    }

    if (a.common.format == "json") {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : rows) {
            nlohmann::json j;
            j["mu1"] = r.mu1 ? nlohmann::json(*r.mu1) : nlohmann::json(nullptr);
            j["sigma1sq"] = r.sigma1sq ? nlohmann::json(*r.sigma1sq) : nlohmann::json(nullptr);
            j["d"] = r.d;
            j["rejection_rate"] = r.rejection_rate;
            j["stderr"] = r.standard_error;
            j["rejections"] = r.rejections;
            j["test"] = r.test;
            j["m"] = po.m;
            j["n"] = po.n;
            j["alpha"] = po.alpha;
            j["reps"] = r.mc_reps;
            j["seed"] = po.rng.master_seed();
            if (!a.setting.empty()) j["setting"] = a.setting;
            arr.push_back(j);
        }
        emit(a.common, dump(arr), out);
    } else {
        emit(a.common, power_tsv(rows, po), out);
    }
    return kExitOk;
}

// ---- scaling ----------------------------------------------------------

struct ScalingArgs {
    Common common;
    double sigmax2 = 1;
    double sigmay2 = 100;
    std::vector<long long> dims = {100, 400};
    long long m = 50;
    long long n = 50;
    std::size_t reps = 50;
    std::size_t nperm = 100;
};

int cmd_scaling(const ScalingArgs& a, std::ostream& out) {
    if (!(a.sigmax2 > 0) || !(a.sigmay2 > 0)) throw InvalidArgument("variances must be positive");
    ScalingOptions so;
    so.m = a.m;
    so.n = a.n;
    so.sigma_x2 = a.sigmax2;
    so.sigma_y2 = a.sigmay2;
    so.reps = a.reps;
    so.b_perms = a.nperm;
    so.rng = RngPolicy(resolve_seed(a.common));
    so.workers = a.common.workers;
    const std::vector<Index> dims = parse_dims(a.dims);
    const auto rows = scaling_diagnostic(dims, so);
    if (a.common.format == "json") {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : rows)
            arr.push_back({{"d", r.d},
                           {"median_s_over_d", r.median_s_over_d},
                           {"median_perm_s_over_d", r.median_perm_s_over_d},
                           {"median_t_observed", r.median_t_observed},
                           {"median_t_perm", r.median_t_perm},
                           {"frac_exceeds_max", r.frac_exceeds_max}});
        emit(a.common, dump(arr), out);
    } else {
        emit(a.common, scaling_tsv(rows), out);
    }
    return kExitOk;
}

// ---- baseline ---------------------------------------------------------

struct BaselineArgs {
    Common common;
    DataFlags data;
    std::string method;
    std::string setting = "s1";
    long long d = 100;
    long long m = 50;
    long long n = 50;
    std::size_t nperm = 1000;
    std::optional<long long> k;
    std::optional<std::size_t> max_perm_stats;
};

int cmd_baseline(const BaselineArgs& a, std::istream& in, std::ostream& out) {
    const std::uint64_t seed = resolve_seed(a.common);
    const RngPolicy rng(seed);
    if (a.k && *a.k < 1) throw InvalidArgument("--k must be positive");
    if (a.nperm < 1) throw InvalidArgument("--nperm must be positive");
    std::optional<SamplePair> sp;
    if (!a.data.input.empty()) {
        sp.emplace(read_input(a.data.input, load_options(a.data), in));
    } else {
        if (a.d < 1 || a.m < 1 || a.n < 1) throw InvalidArgument("--d, --m and --n must be positive");
        const auto [f1, f2] = setting_pair(parse_setting(a.setting), a.d, a.n);
        const RngPolicy data_rng = rng.derive(0);
        Engine sx = data_rng.stream(0), sy = data_rng.stream(1);
        sp.emplace(sample_distribution(f1, a.m, sx), sample_distribution(f2, a.n, sy));
    }

    nlohmann::json j;
    if (a.method == "energy") {
        PermutationPlan plan;
        plan.b_perms = a.nperm;
        plan.rng = rng.derive(1);
        plan.workers = a.common.workers;
        const EnergyResult r = energy_test(*sp, plan);
        j = to_json(r, a.max_perm_stats);
        j["seed"] = seed;
        j["reject"] = r.empirical_p < a.common.alpha;
    } else {
        HotellingResult r;
        if (a.method == "rp") {
            RPConfig cfg;
            if (a.k) cfg.k = *a.k;
            cfg.rng = rng.derive(1);
            r = rp_test(*sp, cfg);
        } else {
            r = hotelling_t2(*sp);
        }
        j = to_json(r, a.method, seed);
        j["reject"] = r.p_value < a.common.alpha;
    }
    j["alpha"] = a.common.alpha;
    j["m"] = sp->m();
    j["n"] = sp->n();
    j["d"] = sp->d();
    if (a.data.input.empty()) j["setting"] = a.setting;

    if (a.common.format == "tsv") {
        std::ostringstream os;
        os << "method\tobserved\tp_value\tseed\n"
           << a.method << '\t' << fmt(j["observed"].get<double>()) << '\t'
           << fmt(a.method == "energy" ? j["empirical_p"].get<double>() : j["p_value"].get<double>()) << '\t' << seed
           << '\n';
        emit(a.common, os.str(), out);
    } else {
        emit(a.common, dump(j), out);
    }
    return kExitOk;
}

int exit_code_for(const Error& e) {
    const std::string kind = e.kind();
    if (kind == "SolverError" || kind == "DegenerateDirection" || kind == "SingularCovariance" ||
        kind == "ZeroVariance" || kind == "DegenerateNull")
        return kExitCompute;
    return kExitInvalid;
}

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Direction-projection-permutation two-sample tests for high-dimensional data", "diproperm"};
    app.require_subcommand(1, 1);
    app.footer(pair_listing());

    TestArgs ta;
    auto* test = app.add_subcommand("test", "Run one DiProPerm test on a labelled data file");
    add_common(test, ta.common, "json");
    add_data_flags(test, ta.data, true);
    test->add_option("--direction", ta.direction, "Direction method")->check(CLI::IsMember(kDirections));
    test->add_option("--stat", ta.stat, "Univariate statistic")->check(CLI::IsMember(kStats));
    test->add_option("--nperm", ta.nperm, "Number of relabelings");
    test->add_option("--projections", ta.projections, "Write projected values of every world as TSV");
    test->add_flag("--smoothed-p", ta.smoothed, "Report (count + 1) / (B + 1)");
    test->add_option("--max-perm-stats", ta.max_perm_stats, "Truncate the perm_stats array in the JSON output");
    test->add_option("--penalty", ta.penalty, "SVM/DWD penalty C (default: 100 / median squared distance)");
    test->footer(pair_listing());

    PowerArgs pa;
    auto* power = app.add_subcommand("power", "Monte Carlo rejection rates over dimensions or a (mu1, sigma1sq) grid");
    add_common(power, pa.common, "tsv");
    power->add_option("--setting", pa.setting, "Simulation setting")->check(CLI::IsMember({"s1", "s2", "s3", "null"}));
    power->add_option("--test", pa.tests, "Tests: direction-stat pairs, energy, rp, hotelling")->delimiter(',');
    power->add_option("--dims", pa.dims, "Comma-separated dimensions")->delimiter(',');
    power->add_option("--mu1", pa.mu1, "Mean fill of F1 = N(mu1 1, sigma1sq I)")->delimiter(',');
    power->add_option("--sigma1sq", pa.sigma1sq, "Variance of F1")->delimiter(',');
    power->add_option("--m", pa.m, "Size of sample 1");
    power->add_option("--n", pa.n, "Size of sample 2");
    power->add_option("--reps", pa.reps, "Monte Carlo replicates");
    power->add_option("--nperm", pa.nperm, "Relabelings per permutation test");
    power->add_option("--emit-dataset", pa.emit_dataset, "Write one simulated dataset as CSV (- for stdout) and exit");
    power->footer(pair_listing());

    ScalingArgs sa;
    auto* scaling = app.add_subcommand("scaling", "Growth of the MD-t denominator with dimension");
    add_common(scaling, sa.common, "tsv");
    scaling->add_option("--sigmax2", sa.sigmax2, "Variance of sample 1");
    scaling->add_option("--sigmay2", sa.sigmay2, "Variance of sample 2");
    scaling->add_option("--dims", sa.dims, "Comma-separated dimensions")->delimiter(',');
    scaling->add_option("--m", sa.m, "Size of sample 1");
    scaling->add_option("--n", sa.n, "Size of sample 2");
    scaling->add_option("--reps", sa.reps, "Replicates per dimension");
    scaling->add_option("--nperm", sa.nperm, "Relabelings per replicate");

    BaselineArgs ba;
    auto* baseline = app.add_subcommand("baseline", "Energy, random-projection or Hotelling test");
    add_common(baseline, ba.common, "json");
    add_data_flags(baseline, ba.data, false);
    baseline->add_option("--method", ba.method, "Baseline test")
        ->required()
        ->check(CLI::IsMember({"energy", "rp", "hotelling"}));
    baseline->add_option("--setting", ba.setting, "Simulation setting when no input file is given")
        ->check(CLI::IsMember({"s1", "s2", "s3", "null"}));
    baseline->add_option("--d", ba.d, "Dimension of the simulated data");
    baseline->add_option("--m", ba.m, "Size of simulated sample 1");
    baseline->add_option("--n", ba.n, "Size of simulated sample 2");
    baseline->add_option("--nperm", ba.nperm, "Relabelings for the energy test");
    baseline->add_option("--k", ba.k, "Projected dimension for rp (default floor(min(m, n) / 2))");
    baseline->add_option("--max-perm-stats", ba.max_perm_stats, "Truncate the perm_stats array");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        const auto parsed = app.get_subcommands();
        out << (parsed.empty() ? app.help() : parsed.front()->help());
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    }

    try {
        if (*test) return cmd_test(ta, in, out);
        if (*power) return cmd_power(pa, out);
        if (*scaling) return cmd_scaling(sa, out);
        if (*baseline) return cmd_baseline(ba, in, out);
    } catch (const Error& e) {
        err << "error: " << e.kind() << ": " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitCompute;
    }
    return kExitInvalid;
}

}  // namespace diproperm::cli
