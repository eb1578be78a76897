#include "sfv/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "sfv/error.hpp"

namespace sfv::oracle {

double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

double lasso_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& b,
                       double lambda) {
    return 0.5 * (y - X * b).squaredNorm() + lambda * b.lpNorm<1>();
}

namespace {

double kkt_violation(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& b, double lambda) {
    const Eigen::VectorXd g = X.transpose() * (y - X * b);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < b.size(); ++j) {
        const double v = b[j] != 0.0 ? std::abs(g[j] - lambda * (b[j] > 0 ? 1.0 : -1.0))
                                     : std::max(0.0, std::abs(g[j]) - lambda);
        worst = std::max(worst, v);
    }
    return worst;
}

} // namespace

OracleSolution lasso_at_lambda(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda, double tol,
                               long max_iter) {
    if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be nonnegative");
    if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
    if (X.rows() != y.size()) throw InvalidArgument("X and y disagree in the number of rows");

    const Eigen::Index p = X.cols();
    const Eigen::VectorXd col_sq = X.colwise().squaredNorm().transpose();
    const double scale = 1.0 + y.norm();
    OracleSolution sol;
    sol.coefficients = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd resid = y;
    auto& b = sol.coefficients;

    while (sol.iterations < max_iter) {
        ++sol.iterations;
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (col_sq[j] == 0.0) continue;
            const double old = b[j];
            const double fresh = soft_threshold(old * col_sq[j] + X.col(j).dot(resid), lambda) / col_sq[j];
            if (fresh != old) {
                resid.noalias() -= (fresh - old) * X.col(j);
                b[j] = fresh;
                max_change = std::max(max_change, std::abs(fresh - old));
            }
        }
        if (max_change < tol * scale) {
            // Incremental updates drift; restart from the exact residual.
            resid = y - X * b;
            sol.kkt_residual = kkt_violation(X, y, b, lambda);
            if (sol.kkt_residual < 10.0 * tol * scale) {
                sol.converged = true;
                break;
            }
        }
    }
    if (!sol.converged) sol.kkt_residual = kkt_violation(X, y, b, lambda);
    sol.objective = lasso_objective(X, y, b, lambda);
    return sol;
}

GreedyStep greedy_rss_step(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<int>& active) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    const Eigen::Index a = static_cast<Eigen::Index>(active.size());
    std::vector<char> in_active(static_cast<std::size_t>(p), 0);
    for (int j : active) in_active[static_cast<std::size_t>(j)] = 1;

    Eigen::MatrixXd XA(n, a);
    for (Eigen::Index i = 0; i < a; ++i) XA.col(i) = X.col(active[static_cast<std::size_t>(i)]);
    Eigen::HouseholderQR<Eigen::MatrixXd> base(XA);

    const double tie = 1e-10 * y.squaredNorm();
    GreedyStep step;
    double best_rss = 0.0;
    Eigen::MatrixXd XS(n, a + 1);
    XS.leftCols(a) = XA;
    for (Eigen::Index j = 0; j < p; ++j) {
        if (in_active[static_cast<std::size_t>(j)]) continue;
        if (a > 0) {
            const Eigen::VectorXd fit = XA * base.solve(X.col(j));
            if ((X.col(j) - fit).norm() < 1e-10 * X.col(j).norm()) continue;
        } else if (X.col(j).norm() == 0.0) {
            continue;
        }
        XS.col(a) = X.col(j);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(XS);
        const double rss = (y - XS * qr.solve(y)).squaredNorm();
        if (step.best < 0 || rss < best_rss - tie) {
            step.best = static_cast<int>(j);
            best_rss = rss;
        }
    }
    if (step.best < 0) throw NumericalError("no admissible candidate: every column is collinear with the active set");
    step.rss = best_rss;
    return step;
}

std::vector<int> greedy_sequence(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int steps) {
    std::vector<int> active;
    for (int s = 0; s < steps; ++s) {
        if (static_cast<Eigen::Index>(active.size()) >= std::min(X.rows(), X.cols())) break;
        try {
            active.push_back(greedy_rss_step(X, y, active).best);
        } catch (const NumericalError&) {
            break;
        }
    }
    return active;
}

} // namespace sfv::oracle
