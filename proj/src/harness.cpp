#include "sfv/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "sfv/csv.hpp"
#include "sfv/diagram.hpp"
#include "sfv/error.hpp"
#include "sfv/predict.hpp"
#include "sfv/svg.hpp"

namespace sfv {

namespace {

double magnitude_factor(const ExperimentConfig& c) {
    return c.units == MagnitudeUnits::Sqrt2LogP ? std::sqrt(2.0 * std::log(static_cast<double>(c.design.p))) : 1.0;
}

} // namespace

// ---------------------------------------------------------------------------
// configuration

bool ExperimentConfig::wants(OutputKind kind) const {
    return std::find(outputs.begin(), outputs.end(), kind) != outputs.end();
}

std::size_t ExperimentConfig::sweep_size() const { return axis == SweepAxis::Grid ? signal_grid.size() : sweep.size(); }

double ExperimentConfig::sweep_value(std::size_t index) const {
    if (axis == SweepAxis::Grid) return signal_grid.at(index).support_size();
    return sweep.at(index);
}

DesignSpec ExperimentConfig::design_at(std::size_t index) const {
    DesignSpec d = design;
    if (axis == SweepAxis::Rho) {
        const double rho = sweep.at(index);
        if (std::holds_alternative<EquiCorrelation>(*d.correlation))
            d.correlation = EquiCorrelation{rho};
        else
            d.correlation = DecayingCorrelation{rho};
    }
    return d;
}

SignalSpec ExperimentConfig::signal_at(std::size_t index) const {
    if (axis == SweepAxis::Grid) return signal_grid.at(index);
    int kk = k;
    double m = magnitude;
    if (axis == SweepAxis::K) kk = static_cast<int>(std::lround(sweep.at(index)));
    if (axis == SweepAxis::M) m = sweep.at(index);
    m *= magnitude_factor(*this);

    SignalSpec s;
    s.p = design.p;
    s.noise_sigma = sigma;
    s.shuffle_support = shuffle_support;
    if (kk > 0) {
        if (recipe == SignalRecipe::SingleBlock) {
            s.blocks.push_back({kk, m});
        } else {
            // Second half of the support carries M^2 / (10 sqrt(2 ln p)).
            const double second = m * m / (10.0 * std::sqrt(2.0 * std::log(static_cast<double>(design.p))));
            const int first = kk - kk / 2;
            s.blocks.push_back({first, m});
            if (kk / 2 > 0) s.blocks.push_back({kk / 2, second});
        }
    }
    return s;
}

void ExperimentConfig::validate() const {
    design.validate();
    if (replicates < 1) throw InvalidArgument("replicates must be at least 1");
    if (methods.empty()) throw InvalidArgument("at least one path method is required");
    if (sweep_size() == 0) throw InvalidArgument("the sweep axis is empty");
    if (axis != SweepAxis::Grid) {
        for (std::size_t i = 1; i < sweep.size(); ++i)
            if (!(sweep[i] > sweep[i - 1])) throw InvalidArgument("sweep values must be strictly increasing");
    }
    if (axis == SweepAxis::Rho && !design.correlation)
        throw InvalidArgument("a rho sweep needs a correlated Gaussian design");
    if (axis == SweepAxis::K) {
        for (double v : sweep)
            if (v < 0 || v != std::floor(v)) throw InvalidArgument("k sweep values must be nonnegative integers");
    }
    if (sigma < 0) throw InvalidArgument("sigma must be nonnegative");
    for (std::size_t i = 0; i < sweep_size(); ++i) {
        SignalSpec s = signal_at(i);
        if (s.p != design.p) throw InvalidArgument("signal grid entry has the wrong dimension");
        s.validate();
        design_at(i).validate();
    }
    if ((wants(OutputKind::DiagramCSV) || wants(OutputKind::DiagramSVG)) && design.n <= design.p)
        throw InvalidArgument("diagram outputs require n > p");
}

double predicted_at(const ExperimentConfig& config, std::size_t index) {
    const int kk = config.signal_at(index).support_size();
    if (kk == 0) return 1.0;
    return predicted_rank(config.design.n, config.design.p, kk).rank;
}

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SFV_WORKERS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------------------
// execution

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    config.validate();
    const std::size_t points = config.sweep_size();
    const std::size_t reps = static_cast<std::size_t>(config.replicates);
    const std::size_t methods = config.methods.size();
    const std::size_t tasks = points * reps;

    std::vector<DesignSpec> designs;
    std::vector<SignalSpec> signals;
    for (std::size_t i = 0; i < points; ++i) {
        designs.push_back(config.design_at(i));
        signals.push_back(config.signal_at(i));
    }

    std::vector<ReplicateRecord> records(tasks * methods);
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr failure;

    auto worker = [&] {
        while (true) {
            const std::size_t task = next.fetch_add(1);
            if (task >= tasks) return;
            const std::size_t point = task / reps;
            const std::size_t rep = task % reps;
            try {
                const Dataset data = generate_dataset(designs[point], signals[point], config.seed, point, rep);
                PathOptions opts;
                opts.stop_after = stop_at_first_noise(data.support, data.p());
                for (std::size_t m = 0; m < methods; ++m) {
                    const PathTrace trace = run_path(config.methods[m], data, opts);
                    ReplicateRecord& rec = records[(point * methods + m) * reps + rep];
                    rec.method = config.methods[m];
                    rec.sweep_index = point;
                    rec.sweep_value = config.sweep_value(point);
                    rec.replicate = static_cast<int>(rep);
                    rec.k = static_cast<int>(data.support.size());
                    rec.report = first_spurious_rank(trace, data.support);
                    rec.report.labeled_events.clear();
                    rec.report.labeled_events.shrink_to_fit();
                    rec.termination = trace.termination;
                }
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!failure) failure = std::current_exception();
                next = tasks;
                return;
            }
        }
    };

    const int workers = static_cast<int>(std::min<std::size_t>(resolve_workers(options.workers), tasks));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    ExperimentResult result;
    result.replicates = std::move(records);
    result.summary = summarize(config, result.replicates);

    if (options.out_dir) {
        std::filesystem::create_directories(*options.out_dir);
        const auto& dir = *options.out_dir;
        if (config.wants(OutputKind::RankCSV)) csv::write_text(dir / "ranks.csv", ranks_csv(result.replicates));
        if (config.wants(OutputKind::SummaryCSV)) csv::write_text(dir / "summary.csv", summary_csv(result.summary));
        if (config.wants(OutputKind::SVGPlot)) csv::write_text(dir / "plot.svg", summary_svg(config, result.summary));
        if (config.wants(OutputKind::DiagramCSV) || config.wants(OutputKind::DiagramSVG)) {
            // Diagram for the first sweep point, replicate 0, along the LARS path.
            const Dataset data = generate_dataset(designs[0], signals[0], config.seed, 0, 0);
            const PathTrace trace = lars_path(data.X, data.y);
            const DiagramTable table = double_ranking(trace, least_squares_tstats(data.X, data.y), data.support);
            if (config.wants(OutputKind::DiagramCSV)) csv::write_text(dir / "diagram.csv", diagram_csv(table));
            if (config.wants(OutputKind::DiagramSVG)) csv::write_text(dir / "diagram.svg", diagram_svg(table));
        }
        csv::write_text(dir / "config.json", config_to_json(config).dump(2) + "\n");
    }
    return result;
}

std::vector<SummaryRow> summarize(const ExperimentConfig& config, const std::vector<ReplicateRecord>& records) {
    std::vector<SummaryRow> rows;
    const std::size_t reps = static_cast<std::size_t>(config.replicates);
    const std::size_t methods = config.methods.size();
    for (std::size_t point = 0; point < config.sweep_size(); ++point) {
        for (std::size_t m = 0; m < methods; ++m) {
            SummaryRow row;
            row.method = config.methods[m];
            row.sweep_value = config.sweep_value(point);
            row.predicted_T = predicted_at(config, point);
            double sum = 0.0;
            std::vector<double> ts;
            for (std::size_t r = 0; r < reps; ++r) {
                const auto& rec = records[(point * methods + m) * reps + r];
                if (rec.excluded()) continue;
                ts.push_back(*rec.report.T);
                sum += *rec.report.T;
            }
            row.replicates_with_T = static_cast<int>(ts.size());
            if (!ts.empty()) {
                row.mean_T = sum / static_cast<double>(ts.size());
                if (ts.size() > 1) {
                    double ss = 0.0;
                    for (double t : ts) ss += (t - row.mean_T) * (t - row.mean_T);
                    row.sd_T = std::sqrt(ss / static_cast<double>(ts.size() - 1));
                }
            } else {
                row.mean_T = std::nan("");
            }
            rows.push_back(row);
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// outputs

std::string ranks_csv(const std::vector<ReplicateRecord>& records) {
    std::ostringstream os;
    os << "method,sweep_value,replicate,T,signals_before,drops_before_first_noise\n";
    for (const auto& r : records) {
        os << to_string(r.method) << ',' << csv::format_double(r.sweep_value) << ',' << r.replicate << ',';
        if (r.report.T) os << *r.report.T;
        os << ',' << r.report.signals_before << ',' << r.report.drops_before_first_noise << '\n';
    }
    return os.str();
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::ostringstream os;
    os << "method,sweep_value,mean_T,sd_T,predicted_T,replicates_with_T\n";
    for (const auto& r : rows) {
        os << to_string(r.method) << ',' << csv::format_double(r.sweep_value) << ',';
        if (r.replicates_with_T > 0) os << csv::format_double(r.mean_T);
        os << ',' << csv::format_double(r.sd_T) << ',' << csv::format_double(r.predicted_T) << ','
           << r.replicates_with_T << '\n';
    }
    return os.str();
}

namespace {

std::string_view axis_label(SweepAxis axis) {
    switch (axis) {
    case SweepAxis::K: return "sparsity k";
    case SweepAxis::M: return "signal magnitude M";
    case SweepAxis::Rho: return "correlation rho";
    case SweepAxis::Grid: return "sparsity k";
    }
    return "";
}

svg::Marker marker_for(PathMethod m) {
    switch (m) {
    case PathMethod::ForwardStepwise: return svg::Marker::Triangle;
    case PathMethod::Lasso: return svg::Marker::Dot;
    case PathMethod::LeastAngle: return svg::Marker::Cross;
    }
    return svg::Marker::Dot;
}

} // namespace

std::string summary_svg(const ExperimentConfig& config, const std::vector<SummaryRow>& rows) {
    svg::Plot plot;
    plot.title = config.name;
    plot.x_label = std::string(axis_label(config.axis));
    plot.y_label = "rank of the first spurious variable";
    plot.legend = {"", "", ""};
    for (PathMethod m : config.methods) {
        const std::size_t slot = static_cast<std::size_t>(marker_for(m));
        plot.legend[slot] = std::string(to_string(m));
    }
    for (const auto& r : rows) {
        if (r.replicates_with_T == 0) continue;
        const double x = config.axis == SweepAxis::M ? r.sweep_value * magnitude_factor(config) : r.sweep_value;
        plot.points.push_back({x, r.mean_T, marker_for(r.method)});
    }
    if (plot.points.empty()) plot.points.push_back({0.0, 0.0, svg::Marker::Dot});

    if (config.wants(OutputKind::PredictionOverlay)) {
        svg::Overlay pred;
        pred.label = "prediction";
        for (std::size_t i = 0; i < config.sweep_size(); ++i) {
            const double v = config.sweep_value(i);
            pred.x.push_back(config.axis == SweepAxis::M ? v * magnitude_factor(config) : v);
            pred.y.push_back(predicted_at(config, i));
        }
        plot.overlays.push_back(std::move(pred));
        if (config.axis == SweepAxis::K) {
            svg::Overlay diag;
            diag.label = "k + 1";
            diag.dashed = true;
            for (std::size_t i = 0; i < config.sweep_size(); ++i) {
                diag.x.push_back(config.sweep_value(i));
                diag.y.push_back(config.sweep_value(i) + 1.0);
            }
            plot.overlays.push_back(std::move(diag));
        }
    }
    return svg::render_scatter(plot);
}

// ---------------------------------------------------------------------------
// presets

namespace {

int scaled(int v, double scale) { return std::max(1, static_cast<int>(std::lround(v * scale))); }

std::vector<double> scaled_grid(std::initializer_list<int> full, double scale, int cap) {
    std::vector<double> out;
    for (int v : full) {
        const int s = std::min(scaled(v, scale), cap);
        if (out.empty() || s > out.back()) out.push_back(s);
    }
    return out;
}

std::vector<PathMethod> all_methods() {
    return {PathMethod::ForwardStepwise, PathMethod::Lasso, PathMethod::LeastAngle};
}

} // namespace

std::vector<std::string> preset_names() {
    return {"fig1", "fig4", "study1a", "study1b", "study2a", "study2b", "study3a", "study3b"};
}

ExperimentConfig preset(const std::string& name, double scale) {
    if (!(scale > 0.0)) throw InvalidArgument("scale must be positive");
    ExperimentConfig c;
    c.name = name;
    c.sigma = 1.0;
    c.replicates = scale >= 1.0 ? 500 : 100;
    c.outputs = {OutputKind::RankCSV, OutputKind::SummaryCSV, OutputKind::PredictionOverlay, OutputKind::SVGPlot};
    c.methods = all_methods();

    auto gaussian = [&](int n, int p) {
        c.design.n = scaled(n, scale);
        c.design.p = scaled(p, scale);
        c.design.family = DesignFamily::GaussianIID;
    };
    const auto cap = [&] { return static_cast<int>(0.99 * c.design.p); };

    if (name == "fig1") {
        gaussian(2000, 1800);
        c.methods = {PathMethod::Lasso};
        c.units = MagnitudeUnits::Sqrt2LogP;
        c.magnitude = 100.0;
        c.axis = SweepAxis::K;
        c.sweep = scaled_grid({10, 20, 40, 80, 120, 160, 200, 240, 280, 320}, scale, cap());
    } else if (name == "fig4") {
        // Desk-sized already; scale applies relative to 200 x 180.
        gaussian(200, 180);
        c.methods = {PathMethod::LeastAngle};
        c.units = MagnitudeUnits::Sqrt2LogP;
        c.magnitude = 100.0;
        c.axis = SweepAxis::K;
        c.sweep = {static_cast<double>(scaled(50, scale))};
        c.replicates = 1;
        c.outputs = {OutputKind::RankCSV, OutputKind::SummaryCSV, OutputKind::DiagramCSV, OutputKind::DiagramSVG};
    } else if (name == "study1a") {
        gaussian(1000, 1000);
        c.magnitude = 100.0;
        c.axis = SweepAxis::K;
        c.sweep = scaled_grid({20, 40, 60, 80, 100, 140, 180, 220, 260, 300}, scale, cap());
    } else if (name == "study1b") {
        c.design.n = scaled(800, scale);
        c.design.p = scaled(1200, scale);
        c.design.family = DesignFamily::BernoulliRademacher;
        // Entries are +-1/sqrt(500) at 800 rows; keep that ratio to n.
        c.design.scale = (800.0 / 500.0) / c.design.n;
        c.magnitude = 100.0;
        c.axis = SweepAxis::K;
        c.sweep = scaled_grid({20, 40, 60, 80, 100, 140, 180, 220, 260, 300}, scale, cap());
    } else if (name == "study2a" || name == "study2b") {
        gaussian(500, 1000);
        c.recipe = name == "study2a" ? SignalRecipe::SingleBlock : SignalRecipe::TwoMixture;
        c.k = scaled(80, scale);
        c.units = MagnitudeUnits::Sqrt2LogP;
        c.axis = SweepAxis::M;
        c.sweep = {0.2, 0.5, 1.0, 1.5, 2.0, 3.0, 3.4, 4.0, 5.0, 6.0, 8.0, 10.0};
    } else if (name == "study3a" || name == "study3b") {
        gaussian(500, 1000);
        c.design.family = DesignFamily::GaussianCorrelated;
        if (name == "study3a")
            c.design.correlation = EquiCorrelation{0.0};
        else
            c.design.correlation = DecayingCorrelation{0.0};
        c.k = scaled(80, scale);
        c.units = MagnitudeUnits::Sqrt2LogP;
        c.magnitude = 100.0;
        c.axis = SweepAxis::Rho;
        c.sweep = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
    } else {
        throw InvalidArgument("unknown preset '" + name + "'");
    }
    return c;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

template <class E>
struct EnumName {
    E value;
    const char* name;
};

constexpr EnumName<DesignFamily> kFamilies[] = {{DesignFamily::GaussianIID, "gaussian_iid"},
                                                {DesignFamily::BernoulliRademacher, "bernoulli"},
                                                {DesignFamily::GaussianCorrelated, "gaussian_correlated"}};
constexpr EnumName<SweepAxis> kAxes[] = {
    {SweepAxis::K, "k"}, {SweepAxis::M, "M"}, {SweepAxis::Rho, "rho"}, {SweepAxis::Grid, "grid"}};
constexpr EnumName<SignalRecipe> kRecipes[] = {{SignalRecipe::SingleBlock, "single_block"},
                                               {SignalRecipe::TwoMixture, "two_mixture"}};
constexpr EnumName<MagnitudeUnits> kUnits[] = {{MagnitudeUnits::Absolute, "absolute"},
                                               {MagnitudeUnits::Sqrt2LogP, "sqrt_2_log_p"}};
constexpr EnumName<OutputKind> kOutputs[] = {{OutputKind::RankCSV, "ranks_csv"},
                                             {OutputKind::SummaryCSV, "summary_csv"},
                                             {OutputKind::PredictionOverlay, "prediction_overlay"},
                                             {OutputKind::SVGPlot, "svg_plot"},
                                             {OutputKind::DiagramCSV, "diagram_csv"},
                                             {OutputKind::DiagramSVG, "diagram_svg"}};

template <class E, std::size_t N>
E lookup(const EnumName<E> (&table)[N], const std::string& name, const char* what) {
    for (const auto& e : table)
        if (name == e.name) return e.value;
    std::string valid;
    for (const auto& e : table) valid += std::string(valid.empty() ? "" : ", ") + e.name;
    throw ParseError(std::string("unknown ") + what + " '" + name + "' (expected one of: " + valid + ")");
}

template <class E, std::size_t N>
const char* name_of(const EnumName<E> (&table)[N], E value) {
    for (const auto& e : table)
        if (e.value == value) return e.name;
    return "?";
}

SignalSpec signal_from_json(const nlohmann::json& j, int p) {
    SignalSpec s;
    s.p = p;
    s.noise_sigma = j.value("noise_sigma", 0.0);
    s.shuffle_support = j.value("shuffle_support", false);
    for (const auto& b : j.at("blocks")) s.blocks.push_back({b.at("count").get<int>(), b.at("magnitude").get<double>()});
    return s;
}

} // namespace

ExperimentConfig config_from_json(const nlohmann::json& doc) {
    try {
        ExperimentConfig c;
        c.name = doc.value("name", std::string("experiment"));
        const auto& d = doc.at("design");
        c.design.n = d.at("n").get<int>();
        c.design.p = d.at("p").get<int>();
        c.design.family = lookup(kFamilies, d.value("family", std::string("gaussian_iid")), "design family");
        if (d.contains("scale")) c.design.scale = d.at("scale").get<double>();
        if (d.contains("correlation")) {
            const auto& corr = d.at("correlation");
            const std::string type = corr.at("type").get<std::string>();
            const double rho = corr.value("rho", 0.0);
            if (type == "equi")
                c.design.correlation = EquiCorrelation{rho};
            else if (type == "decaying")
                c.design.correlation = DecayingCorrelation{rho};
            else
                throw ParseError("unknown correlation type '" + type + "' (expected equi or decaying)");
        }
        if (doc.contains("signal")) {
            const auto& s = doc.at("signal");
            c.recipe = lookup(kRecipes, s.value("recipe", std::string("single_block")), "signal recipe");
            c.k = s.value("k", 0);
            c.magnitude = s.value("magnitude", 0.0);
            c.units = lookup(kUnits, s.value("units", std::string("absolute")), "magnitude units");
            c.sigma = s.value("sigma", 1.0);
            c.shuffle_support = s.value("shuffle_support", false);
        }
        if (doc.contains("signal_grid")) {
            for (const auto& s : doc.at("signal_grid")) c.signal_grid.push_back(signal_from_json(s, c.design.p));
        }
        if (doc.contains("sweep")) {
            const auto& sw = doc.at("sweep");
            c.axis = lookup(kAxes, sw.at("axis").get<std::string>(), "sweep axis");
            c.sweep = sw.value("values", std::vector<double>{});
        } else if (!c.signal_grid.empty()) {
            c.axis = SweepAxis::Grid;
        }
        if (doc.contains("methods")) {
            c.methods.clear();
            for (const auto& m : doc.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
        }
        c.replicates = doc.value("replicates", 1);
        c.seed = doc.at("seed").get<std::uint64_t>();
        if (doc.contains("outputs")) {
            c.outputs.clear();
            for (const auto& o : doc.at("outputs")) c.outputs.push_back(lookup(kOutputs, o.get<std::string>(), "output"));
        }
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid experiment configuration: ") + e.what());
    }
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
    nlohmann::json doc;
    doc["name"] = c.name;
    auto& d = doc["design"];
    d["n"] = c.design.n;
    d["p"] = c.design.p;
    d["family"] = name_of(kFamilies, c.design.family);
    d["scale"] = c.design.entry_variance();
    if (c.design.correlation) {
        if (auto* e = std::get_if<EquiCorrelation>(&*c.design.correlation))
            d["correlation"] = {{"type", "equi"}, {"rho", e->rho}};
        else
            d["correlation"] = {{"type", "decaying"}, {"rho", std::get<DecayingCorrelation>(*c.design.correlation).rho}};
    }
    doc["signal"] = {{"recipe", name_of(kRecipes, c.recipe)},
                     {"k", c.k},
                     {"magnitude", c.magnitude},
                     {"units", name_of(kUnits, c.units)},
                     {"sigma", c.sigma},
                     {"shuffle_support", c.shuffle_support}};
    if (c.axis == SweepAxis::Grid) {
        auto grid = nlohmann::json::array();
        for (const auto& s : c.signal_grid) {
            auto blocks = nlohmann::json::array();
            for (const auto& b : s.blocks) blocks.push_back({{"count", b.count}, {"magnitude", b.magnitude}});
            grid.push_back({{"blocks", blocks}, {"noise_sigma", s.noise_sigma}, {"shuffle_support", s.shuffle_support}});
        }
        doc["signal_grid"] = grid;
    }
    doc["sweep"] = {{"axis", name_of(kAxes, c.axis)}, {"values", c.sweep}};
    auto methods = nlohmann::json::array();
    for (auto m : c.methods) methods.push_back(std::string(to_string(m)));
    doc["methods"] = methods;
    doc["replicates"] = c.replicates;
    doc["seed"] = c.seed;
    auto outputs = nlohmann::json::array();
    for (auto o : c.outputs) outputs.push_back(name_of(kOutputs, o));
    doc["outputs"] = outputs;
    return doc;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return config_from_json(doc);
}

} // namespace sfv
