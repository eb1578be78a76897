#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sfv/design.hpp"
#include "sfv/rankstat.hpp"
#include "sfv/seqpath.hpp"

namespace sfv {

enum class SweepAxis { K, M, Rho, Grid };
enum class SignalRecipe { SingleBlock, TwoMixture };
enum class MagnitudeUnits { Absolute, Sqrt2LogP };
enum class OutputKind { RankCSV, SummaryCSV, PredictionOverlay, SVGPlot, DiagramCSV, DiagramSVG };

/// One Monte Carlo study: a design family, a signal recipe and a sweep over
/// one parameter, run for several path methods and replicates.
struct ExperimentConfig {
    std::string name = "experiment";
    DesignSpec design;

    SignalRecipe recipe = SignalRecipe::SingleBlock;
    int k = 0;                ///< sparsity when the sweep is not over k
    double magnitude = 0.0;   ///< M when the sweep is not over M
    /// Sqrt2LogP multiplies `magnitude` and M sweep values by sqrt(2 ln p).
    MagnitudeUnits units = MagnitudeUnits::Absolute;
    double sigma = 1.0;
    bool shuffle_support = false;

    SweepAxis axis = SweepAxis::K;
    std::vector<double> sweep;            ///< strictly increasing
    std::vector<SignalSpec> signal_grid;  ///< used when axis == Grid

    std::vector<PathMethod> methods{PathMethod::Lasso};
    int replicates = 1;
    std::uint64_t seed = 0;
    std::vector<OutputKind> outputs{OutputKind::RankCSV, OutputKind::SummaryCSV};

    void validate() const;
    [[nodiscard]] std::size_t sweep_size() const;
    [[nodiscard]] double sweep_value(std::size_t index) const;
    [[nodiscard]] DesignSpec design_at(std::size_t index) const;
    [[nodiscard]] SignalSpec signal_at(std::size_t index) const;
    [[nodiscard]] bool wants(OutputKind kind) const;
};

struct ReplicateRecord {
    PathMethod method = PathMethod::Lasso;
    std::size_t sweep_index = 0;
    double sweep_value = 0.0;
    int replicate = 0;
    int k = 0;
    RankReport report; ///< labeled_events cleared to keep memory flat
    Termination termination = Termination::StepLimit;
    /// The engine stalled before any noise variable entered.
    [[nodiscard]] bool excluded() const { return !report.T; }
};

struct SummaryRow {
    PathMethod method = PathMethod::Lasso;
    double sweep_value = 0.0;
    double mean_T = 0.0;
    double sd_T = 0.0; ///< per-replicate standard deviation (divisor n-1)
    double predicted_T = 0.0;
    int replicates_with_T = 0;
};

struct ExperimentResult {
    std::vector<SummaryRow> summary;
    std::vector<ReplicateRecord> replicates; ///< ordered by (sweep, method, replicate)
};

struct RunOptions {
    /// 0 uses SFV_WORKERS, then the hardware concurrency.
    int workers = 0;
    /// When set, requested outputs are written here.
    std::optional<std::filesystem::path> out_dir;
};

/// Worker count from SFV_WORKERS (if set and positive) capped by `fallback`.
int resolve_workers(int requested);

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

std::vector<SummaryRow> summarize(const ExperimentConfig& config, const std::vector<ReplicateRecord>& records);

std::string ranks_csv(const std::vector<ReplicateRecord>& records);
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string summary_svg(const ExperimentConfig& config, const std::vector<SummaryRow>& rows);

/// Predicted first-spurious rank at a sweep point (1 for an empty support).
double predicted_at(const ExperimentConfig& config, std::size_t index);

/// Built-in studies: fig1, fig4, study1a, study1b, study2a, study2b,
/// study3a, study3b. `scale` shrinks n, p and sparsity proportionally.
ExperimentConfig preset(const std::string& name, double scale);
std::vector<std::string> preset_names();

ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

} // namespace sfv
