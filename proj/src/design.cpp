#include "sfv/design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "sfv/csv.hpp"
#include "sfv/error.hpp"
#include "sfv/rng.hpp"

namespace sfv {

void DesignSpec::validate() const {
    if (n < 1 || p < 1) throw InvalidArgument("design dimensions must be positive (n=" + std::to_string(n) +
                                              ", p=" + std::to_string(p) + ")");
    if (!(entry_variance() > 0.0) || !std::isfinite(entry_variance()))
        throw InvalidArgument("design scale must be positive and finite");
    const bool correlated = family == DesignFamily::GaussianCorrelated;
    if (correlated != correlation.has_value())
        throw InvalidArgument("a correlation structure is required exactly for the correlated Gaussian family");
    if (correlation) {
        if (auto* equi = std::get_if<EquiCorrelation>(&*correlation)) {
            if (!(equi->rho >= 0.0 && equi->rho < 1.0))
                throw InvalidArgument("equicorrelation rho must lie in [0, 1)");
        } else {
            double rho = std::get<DecayingCorrelation>(*correlation).rho;
            if (!(rho > -1.0 && rho < 1.0)) throw InvalidArgument("decaying correlation rho must lie in (-1, 1)");
        }
    }
}

int SignalSpec::support_size() const {
    int k = 0;
    for (const auto& b : blocks) k += b.count;
    return k;
}

void SignalSpec::validate() const {
    if (p < 1) throw InvalidArgument("signal dimension p must be positive");
    for (const auto& b : blocks) {
        if (b.count < 1) throw InvalidArgument("signal block counts must be positive");
        if (b.magnitude == 0.0 || !std::isfinite(b.magnitude))
            throw InvalidArgument("signal block magnitudes must be finite and nonzero");
    }
    if (support_size() > p)
        throw InvalidArgument("signal blocks cover " + std::to_string(support_size()) + " coefficients but p=" +
                              std::to_string(p));
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
        throw InvalidArgument("noise sigma must be nonnegative and finite");
}

std::vector<int> support_of(const Eigen::VectorXd& beta) {
    std::vector<int> s;
    for (Eigen::Index j = 0; j < beta.size(); ++j)
        if (beta[j] != 0.0) s.push_back(static_cast<int>(j));
    return s;
}

Eigen::MatrixXd design_covariance(const DesignSpec& design) {
    const int p = design.p;
    const double scale = design.entry_variance();
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(p, p);
    if (design.correlation) {
        if (auto* equi = std::get_if<EquiCorrelation>(&*design.correlation)) {
            sigma.setConstant(equi->rho);
            sigma.diagonal().setOnes();
        } else {
            double rho = std::get<DecayingCorrelation>(*design.correlation).rho;
            for (int i = 0; i < p; ++i)
                for (int j = 0; j < p; ++j) sigma(i, j) = i == j ? 1.0 : std::pow(rho, std::abs(i - j));
        }
    }
    return sigma * scale;
}

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& sigma) {
    const Eigen::Index p = sigma.rows();
    if (sigma.cols() != p) throw InvalidArgument("covariance matrix must be square");
    const double floor = 1e-12 * sigma.trace() / static_cast<double>(p);
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        double pivot = sigma(j, j) - L.row(j).head(j).squaredNorm();
        if (!(pivot >= floor) || pivot <= 0.0)
            throw NumericalError("covariance is not positive definite: leading minor " + std::to_string(j + 1) +
                                 " has pivot " + csv::format_double(pivot));
        const double d = std::sqrt(pivot);
        L(j, j) = d;
        if (j + 1 < p) {
            Eigen::VectorXd col = sigma.col(j).tail(p - j - 1) -
                                  L.bottomLeftCorner(p - j - 1, j) * L.row(j).head(j).transpose();
            L.col(j).tail(p - j - 1) = col / d;
        }
    }
    return L;
}

namespace {

Dataset draw(const DesignSpec& design, const SignalSpec& signal, CounterRng rng) {
    design.validate();
    signal.validate();
    if (design.p != signal.p)
        throw InvalidArgument("design has p=" + std::to_string(design.p) + " but signal has p=" +
                              std::to_string(signal.p));
    const int n = design.n;
    const int p = design.p;
    const double scale = design.entry_variance();

    std::normal_distribution<double> normal(0.0, 1.0);
    Dataset data;
    data.X.resize(n, p);
    switch (design.family) {
    case DesignFamily::GaussianIID: {
        const double sd = std::sqrt(scale);
        for (int j = 0; j < p; ++j)
            for (int i = 0; i < n; ++i) data.X(i, j) = sd * normal(rng);
        break;
    }
    case DesignFamily::BernoulliRademacher: {
        const double a = std::sqrt(scale);
        for (int j = 0; j < p; ++j)
            for (int i = 0; i < n; ++i) data.X(i, j) = (rng() >> 63) ? a : -a;
        break;
    }
    case DesignFamily::GaussianCorrelated: {
        Eigen::MatrixXd L = cholesky_lower(design_covariance(design));
        Eigen::MatrixXd Z(n, p);
        for (int j = 0; j < p; ++j)
            for (int i = 0; i < n; ++i) Z(i, j) = normal(rng);
        data.X.noalias() = Z * L.transpose();
        break;
    }
    }

    std::vector<int> placement(p);
    std::iota(placement.begin(), placement.end(), 0);
    if (signal.shuffle_support) std::shuffle(placement.begin(), placement.end(), rng);

    data.beta = Eigen::VectorXd::Zero(p);
    std::size_t pos = 0;
    for (const auto& block : signal.blocks)
        for (int c = 0; c < block.count; ++c) data.beta[placement[pos++]] = block.magnitude;
    data.support = support_of(data.beta);

    data.sigma = signal.noise_sigma;
    data.y = data.X * data.beta;
    if (signal.noise_sigma > 0.0)
        for (int i = 0; i < n; ++i) data.y[i] += signal.noise_sigma * normal(rng);
    return data;
}

} // namespace

Dataset generate_dataset(const DesignSpec& design, const SignalSpec& signal, std::uint64_t seed) {
    return draw(design, signal, CounterRng(seed));
}

Dataset generate_dataset(const DesignSpec& design, const SignalSpec& signal, std::uint64_t seed,
                         std::uint64_t stream_a, std::uint64_t stream_b) {
    return draw(design, signal, CounterRng(seed).split(stream_a).split(stream_b));
}

Dataset make_dataset(Eigen::MatrixXd X, Eigen::VectorXd beta, Eigen::VectorXd y, double sigma) {
    if (beta.size() != X.cols())
        throw InvalidArgument("coefficient vector has length " + std::to_string(beta.size()) + " but X has " +
                              std::to_string(X.cols()) + " columns");
    if (y.size() != X.rows())
        throw InvalidArgument("response has length " + std::to_string(y.size()) + " but X has " +
                              std::to_string(X.rows()) + " rows");
    Dataset d;
    d.support = support_of(beta);
    d.X = std::move(X);
    d.beta = std::move(beta);
    d.y = std::move(y);
    d.sigma = sigma;
    return d;
}

Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& X) {
    if (X.rows() < 2) throw InvalidArgument("standardizing requires at least two rows");
    Eigen::MatrixXd out = X;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        auto col = out.col(j);
        col.array() -= col.mean();
        col.array() -= col.mean();
        const double norm = col.norm();
        if (!(norm > 1e-14 * X.col(j).norm()) || norm == 0.0)
            throw InvalidArgument("column " + std::to_string(j) + " is constant and cannot be standardized");
        col /= norm;
    }
    return out;
}

Eigen::MatrixXd load_design_csv(const std::filesystem::path& path, bool standardize) {
    Eigen::MatrixXd X = csv::read_matrix(path);
    return standardize ? standardize_columns(X) : X;
}

} // namespace sfv
