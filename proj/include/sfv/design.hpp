#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace sfv {

enum class DesignFamily { GaussianIID, BernoulliRademacher, GaussianCorrelated };

/// Sigma_ij = rho * scale for i != j, scale on the diagonal.
struct EquiCorrelation {
    double rho = 0.0;
};

/// Sigma_ij = rho^|i-j| * scale.
struct DecayingCorrelation {
    double rho = 0.0;
};

using Correlation = std::variant<EquiCorrelation, DecayingCorrelation>;

struct DesignSpec {
    int n = 0;
    int p = 0;
    DesignFamily family = DesignFamily::GaussianIID;
    /// Per-entry variance; 1/n when unset.
    std::optional<double> scale;
    std::optional<Correlation> correlation;

    [[nodiscard]] double entry_variance() const { return scale.value_or(1.0 / n); }
    /// Throws InvalidArgument when the invariants do not hold.
    void validate() const;
};

struct SignalBlock {
    int count = 0;
    double magnitude = 0.0;
};

struct SignalSpec {
    int p = 0;
    std::vector<SignalBlock> blocks;
    double noise_sigma = 0.0;
    /// Place signals on a random index set instead of 0..k-1.
    bool shuffle_support = false;

    [[nodiscard]] int support_size() const;
    void validate() const;
};

/// A realized linear model y = X beta + z. The noise z is consumed at
/// construction and not retained.
struct Dataset {
    Eigen::MatrixXd X;
    Eigen::VectorXd beta;
    Eigen::VectorXd y;
    std::vector<int> support; ///< sorted indices with beta != 0
    double sigma = 0.0;

    [[nodiscard]] int n() const { return static_cast<int>(X.rows()); }
    [[nodiscard]] int p() const { return static_cast<int>(X.cols()); }
};

/// Pure function of (design, signal, seed).
Dataset generate_dataset(const DesignSpec& design, const SignalSpec& signal, std::uint64_t seed);

/// Same as generate_dataset but draws from an already-split stream key.
Dataset generate_dataset(const DesignSpec& design, const SignalSpec& signal, std::uint64_t seed,
                         std::uint64_t stream_a, std::uint64_t stream_b);

/// Builds a dataset from an externally supplied design, coefficients and
/// response (no noise is drawn).
Dataset make_dataset(Eigen::MatrixXd X, Eigen::VectorXd beta, Eigen::VectorXd y, double sigma = 0.0);

/// Covariance matrix implied by a GaussianCorrelated design.
Eigen::MatrixXd design_covariance(const DesignSpec& design);

/// Lower Cholesky factor; throws NumericalError naming the first leading
/// minor whose pivot falls below 1e-12 * trace / p.
Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& sigma);

/// Centers every column and scales it to unit Euclidean norm.
Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& X);

Eigen::MatrixXd load_design_csv(const std::filesystem::path& path, bool standardize);

std::vector<int> support_of(const Eigen::VectorXd& beta);

} // namespace sfv
