#pragma once

#include <vector>

#include <Eigen/Dense>

namespace sfv::oracle {

struct OracleSolution {
    Eigen::VectorXd coefficients;
    double objective = 0.0; ///< 0.5 ||y - Xb||^2 + lambda ||b||_1
    long iterations = 0;    ///< full sweeps
    bool converged = false;
    double kkt_residual = 0.0;
};

/// Cyclic coordinate minimization of the lasso objective from a zero start.
/// Not usable as ground truth when `converged` is false.
OracleSolution lasso_at_lambda(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                               double tol = 1e-10, long max_iter = 1'000'000);

double lasso_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& b,
                       double lambda);

double soft_threshold(double x, double t);

struct GreedyStep {
    int best = -1;
    double rss = 0.0;
};

/// Exact least-squares RSS on active + {j} for every candidate j, by dense
/// Householder QR; returns the minimizer (lowest index within
/// 1e-10 ||y||^2). Throws when every candidate is collinear with `active`.
GreedyStep greedy_rss_step(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<int>& active);

/// Repeated greedy_rss_step calls until `steps` selections are made or no
/// admissible candidate remains.
std::vector<int> greedy_sequence(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int steps);

} // namespace sfv::oracle
