#include "sfv/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "sfv/csv.hpp"
#include "sfv/design.hpp"
#include "sfv/diagram.hpp"
#include "sfv/error.hpp"
#include "sfv/harness.hpp"
#include "sfv/predict.hpp"
#include "sfv/rankstat.hpp"
#include "sfv/seqpath.hpp"

namespace sfv::cli {

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Precondition failures on option values are usage errors.
template <class F>
void as_usage(F&& check) {
    try {
        check();
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

double parse_number(const std::string& s, const std::string& flag) {
    double v = 0.0;
    if (!csv::parse_double(s, v)) throw UsageError(flag + ": '" + s + "' is not a number");
    return v;
}

std::string one_decimal(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

struct GenerateOpts {
    int n = 0, p = 0;
    std::string family;
    double rho = 0.0;
    std::optional<double> entry_scale;
    std::optional<int> k;
    std::optional<double> magnitude;
    std::string blocks;
    std::optional<double> sigma;
    std::optional<std::uint64_t> seed;
    bool shuffle = false;
    std::string out_dir;
};

struct PathOpts {
    std::string method;
    std::string design, response, out;
    bool standardize = false;
    int max_steps = 0;
};

struct RankOpts {
    std::string method, design, response, beta;
    bool standardize = false;
    std::optional<std::uint64_t> seed;
};

struct PredictOpts {
    int n = 0, p = 0;
    std::string k;
    bool full_precision = false;
};

struct DiagramOpts {
    std::string method = "lars";
    std::string design, response, beta, out, svg;
    bool standardize = false;
    int marked = 5;
};

struct SimulateOpts {
    std::string preset, config, out;
    std::optional<double> scale;
    std::optional<int> replicates;
    std::optional<std::uint64_t> seed;
    std::string methods, sweep;
};

DesignSpec build_design(const GenerateOpts& o) {
    DesignSpec d;
    d.n = o.n;
    d.p = o.p;
    d.scale = o.entry_scale;
    if (o.family == "gaussian") {
        d.family = DesignFamily::GaussianIID;
    } else if (o.family == "bernoulli") {
        d.family = DesignFamily::BernoulliRademacher;
    } else if (o.family == "equi") {
        d.family = DesignFamily::GaussianCorrelated;
        d.correlation = EquiCorrelation{o.rho};
    } else if (o.family == "decaying") {
        d.family = DesignFamily::GaussianCorrelated;
        d.correlation = DecayingCorrelation{o.rho};
    } else {
        throw UsageError("--family must be one of gaussian, bernoulli, equi, decaying");
    }
    as_usage([&] { d.validate(); });
    return d;
}

SignalSpec build_signal(const GenerateOpts& o) {
    SignalSpec s;
    s.p = o.p;
    s.shuffle_support = o.shuffle;
    if (!o.sigma) throw UsageError("--sigma is required");
    s.noise_sigma = *o.sigma;
    if (!o.blocks.empty()) {
        if (o.k || o.magnitude) throw UsageError("use either --blocks or --k/--M, not both");
        for (const auto& item : split_list(o.blocks)) {
            auto colon = item.find(':');
            if (colon == std::string::npos) throw UsageError("--blocks entries look like COUNT:MAGNITUDE");
            s.blocks.push_back({static_cast<int>(parse_number(item.substr(0, colon), "--blocks")),
                                parse_number(item.substr(colon + 1), "--blocks")});
        }
    } else {
        if (!o.k || !o.magnitude) throw UsageError("--k and --M (or --blocks) are required");
        if (*o.k > 0) s.blocks.push_back({*o.k, *o.magnitude});
    }
    as_usage([&] { s.validate(); });
    return s;
}

struct Problem {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
};

Problem load_problem(const std::string& design, const std::string& response, bool standardize) {
    Problem pr{load_design_csv(design, standardize), csv::read_vector(response)};
    if (pr.y.size() != pr.X.rows())
        throw InvalidArgument("response has " + std::to_string(pr.y.size()) + " values but the design has " +
                              std::to_string(pr.X.rows()) + " rows");
    return pr;
}

std::vector<int> support_from_file(const std::string& beta_path, Eigen::Index p) {
    const Eigen::VectorXd beta = csv::read_vector(beta_path);
    if (beta.size() != p)
        throw InvalidArgument("coefficient file has " + std::to_string(beta.size()) + " values but the design has " +
                              std::to_string(p) + " columns");
    return support_of(beta);
}

void write_or_print(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-")
        out << text;
    else
        csv::write_text(path, text);
}

std::string flag_list(const CLI::App& app) {
    std::string s;
    for (const CLI::Option* opt : app.get_options()) {
        for (const auto& name : opt->get_lnames()) s += (s.empty() ? "--" : ", --") + name;
    }
    return s;
}

} // namespace

int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Rank of the first spurious variable along sequential regression paths", "sfv"};
    app.set_version_flag("--version", std::string("sfv ") + kVersion);
    app.require_subcommand(1);

    GenerateOpts gen;
    auto* g = app.add_subcommand("generate", "Draw a design, coefficients and response and write them as CSV");
    g->add_option("--n", gen.n, "rows")->required()->check(CLI::PositiveNumber);
    g->add_option("--p", gen.p, "columns")->required()->check(CLI::PositiveNumber);
    g->add_option("--family", gen.family, "gaussian | bernoulli | equi | decaying")->required();
    g->add_option("--rho", gen.rho, "correlation parameter for equi/decaying designs");
    g->add_option("--entry-scale", gen.entry_scale, "per-entry variance (default 1/n)");
    g->add_option("--k", gen.k, "number of signal coefficients")->check(CLI::NonNegativeNumber);
    g->add_option("--M", gen.magnitude, "common signal magnitude");
    g->add_option("--blocks", gen.blocks, "signal blocks COUNT:MAGNITUDE,...");
    g->add_option("--sigma", gen.sigma, "noise standard deviation")->check(CLI::NonNegativeNumber);
    g->add_option("--seed", gen.seed, "random seed")->required();
    g->add_flag("--shuffle-support", gen.shuffle, "place signals on random columns");
    g->add_option("--out", gen.out_dir, "output directory for X.csv, y.csv, beta.csv")->required();

    PathOpts path;
    auto* pa = app.add_subcommand("path", "Compute a path and print its events as CSV");
    pa->add_option("--method", path.method, "stepwise | lasso | lars")->required();
    pa->add_option("--design", path.design, "design CSV")->required();
    pa->add_option("--response", path.response, "response CSV")->required();
    pa->add_flag("--standardize", path.standardize, "center and unit-normalize design columns");
    pa->add_option("--max-steps", path.max_steps, "event budget")->check(CLI::PositiveNumber);
    pa->add_option("--out", path.out, "write CSV here instead of standard output");

    RankOpts rank;
    auto* ra = app.add_subcommand("rank", "Report the rank of the first noise variable");
    ra->add_option("--method", rank.method, "stepwise | lasso | lars")->required();
    ra->add_option("--design", rank.design, "design CSV")->required();
    ra->add_option("--response", rank.response, "response CSV")->required();
    ra->add_option("--beta", rank.beta, "true coefficients CSV (nonzeros define the support)")->required();
    ra->add_flag("--standardize", rank.standardize, "center and unit-normalize design columns");
    ra->add_option("--seed", rank.seed, "seed label copied into the output row");

    PredictOpts pred;
    auto* pr = app.add_subcommand("predict", "Evaluate the predicted rank of the first spurious variable");
    pr->add_option("--n", pred.n, "rows")->required()->check(CLI::PositiveNumber);
    pr->add_option("--p", pred.p, "columns")->required()->check(CLI::Range(2, std::numeric_limits<int>::max()));
    pr->add_option("--k", pred.k, "comma-separated sparsity levels")->required();
    pr->add_flag("--full-precision", pred.full_precision, "print ranks without rounding");

    DiagramOpts dia;
    auto* di = app.add_subcommand("diagram", "Build the double-ranking table (path rank vs least-squares rank)");
    di->add_option("--method", dia.method, "stepwise | lasso | lars (default lars)");
    di->add_option("--design", dia.design, "design CSV")->required();
    di->add_option("--response", dia.response, "response CSV")->required();
    di->add_option("--beta", dia.beta, "true coefficients CSV")->required();
    di->add_flag("--standardize", dia.standardize, "center and unit-normalize design columns");
    di->add_option("--out", dia.out, "write CSV here instead of standard output");
    di->add_option("--svg", dia.svg, "also write an SVG scatter");
    di->add_option("--mark", dia.marked, "number of early noise variables drawn as crosses")
        ->check(CLI::NonNegativeNumber);

    SimulateOpts sim;
    auto* si = app.add_subcommand("simulate", "Run a Monte Carlo study");
    si->add_option("--preset", sim.preset, "fig1 | fig4 | study1a | study1b | study2a | study2b | study3a | study3b");
    si->add_option("--config", sim.config, "JSON experiment configuration");
    si->add_option("--scale", sim.scale, "shrink n, p and k (presets; default 0.25)")->check(CLI::PositiveNumber);
    si->add_option("--replicates", sim.replicates, "replicates per sweep point")->check(CLI::PositiveNumber);
    si->add_option("--seed", sim.seed, "experiment seed");
    si->add_option("--methods", sim.methods, "comma-separated subset of stepwise,lasso,lars");
    si->add_option("--sweep", sim.sweep, "comma-separated sweep values overriding the preset");
    si->add_option("--out", sim.out, "output directory")->required();

    if (args.empty()) {
        err << app.help();
        return 2;
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        out << std::string("sfv ") + kVersion << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        const CLI::App* scope = &app;
        for (const CLI::App* sub : app.get_subcommands()) scope = sub;
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        err << "usage error: " << msg;
        if (scope != &app)
            err << " (valid flags for " << scope->get_name() << ": " << flag_list(*scope) << ")";
        else
            err << " (verbs: generate, path, rank, predict, diagram, simulate)";
        err << '\n';
        return 2;
    }

    try {
        if (g->parsed()) {
            const DesignSpec design = build_design(gen);
            const SignalSpec signal = build_signal(gen);
            const Dataset data = generate_dataset(design, signal, *gen.seed);
            std::filesystem::create_directories(gen.out_dir);
            const std::filesystem::path dir = gen.out_dir;
            csv::write_matrix(dir / "X.csv", data.X);
            csv::write_vector(dir / "y.csv", data.y);
            csv::write_vector(dir / "beta.csv", data.beta);
        } else if (pa->parsed()) {
            PathMethod method{};
            as_usage([&] { method = parse_method(path.method); });
            const Problem problem = load_problem(path.design, path.response, path.standardize);
            PathOptions opts;
            opts.max_steps = path.max_steps;
            write_or_print(path.out, trace_csv(run_path(method, problem.X, problem.y, opts)), out);
        } else if (ra->parsed()) {
            PathMethod method{};
            as_usage([&] { method = parse_method(rank.method); });
            const Problem problem = load_problem(rank.design, rank.response, rank.standardize);
            const auto support = support_from_file(rank.beta, problem.X.cols());
            PathOptions opts;
            opts.stop_after = stop_at_first_noise(support, static_cast<int>(problem.X.cols()));
            const RankReport report = first_spurious_rank(run_path(method, problem.X, problem.y, opts), support);
            out << rank_csv_header() << '\n'
                << rank_csv_row(method, rank.seed, static_cast<int>(support.size()), report) << '\n';
        } else if (pr->parsed()) {
            std::vector<double> ks;
            for (const auto& item : split_list(pred.k)) {
                const double k = parse_number(item, "--k");
                if (!(k >= 1.0) || k != std::floor(k)) throw UsageError("--k values must be positive integers");
                ks.push_back(k);
            }
            if (ks.empty()) throw UsageError("--k needs at least one value");
            out << "k,cutoff,regime,predicted_rank,predicted_log_rank\n";
            for (double k : ks) {
                const Prediction p = predicted_rank(pred.n, pred.p, k);
                auto show = [&](double v) { return pred.full_precision ? csv::format_double(v) : one_decimal(v); };
                out << static_cast<long long>(k) << ',' << show(p.cutoff) << ',' << to_string(p.regime) << ','
                    << show(p.rank) << ',' << csv::format_double(p.log_rank) << '\n';
            }
        } else if (di->parsed()) {
            PathMethod method{};
            as_usage([&] { method = parse_method(dia.method); });
            const Problem problem = load_problem(dia.design, dia.response, dia.standardize);
            const auto support = support_from_file(dia.beta, problem.X.cols());
            const Eigen::VectorXd t = least_squares_tstats(problem.X, problem.y);
            const DiagramTable table = double_ranking(run_path(method, problem.X, problem.y), t, support);
            write_or_print(dia.out, diagram_csv(table), out);
            if (!dia.svg.empty()) csv::write_text(dia.svg, diagram_svg(table, dia.marked));
        } else if (si->parsed()) {
            if (sim.preset.empty() == sim.config.empty()) throw UsageError("give exactly one of --preset or --config");
            ExperimentConfig config;
            if (!sim.preset.empty()) {
                if (!sim.seed) throw UsageError("--seed is required");
                config = preset(sim.preset, sim.scale.value_or(0.25));
            } else {
                if (sim.scale) throw UsageError("--scale applies to presets only");
                config = load_config(sim.config);
            }
            if (sim.seed) config.seed = *sim.seed;
            if (sim.replicates) config.replicates = *sim.replicates;
            if (!sim.methods.empty()) {
                config.methods.clear();
                for (const auto& m : split_list(sim.methods))
                    as_usage([&] { config.methods.push_back(parse_method(m)); });
            }
            if (!sim.sweep.empty()) {
                config.sweep.clear();
                for (const auto& v : split_list(sim.sweep)) config.sweep.push_back(parse_number(v, "--sweep"));
                if (config.axis == SweepAxis::Grid) throw UsageError("--sweep cannot override a signal grid");
            }
            as_usage([&] { config.validate(); });
            RunOptions run;
            run.out_dir = std::filesystem::path(sim.out);
            run_experiment(config, run);
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace sfv::cli
