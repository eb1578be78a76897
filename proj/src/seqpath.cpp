#include "sfv/seqpath.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "sfv/active_cholesky.hpp"
#include "sfv/csv.hpp"
#include "sfv/error.hpp"

namespace sfv {

std::string_view to_string(PathMethod m) {
    switch (m) {
    case PathMethod::ForwardStepwise: return "stepwise";
    case PathMethod::Lasso: return "lasso";
    case PathMethod::LeastAngle: return "lars";
    }
    return "?";
}

std::string_view to_string(EventKind k) { return k == EventKind::Enter ? "enter" : "drop"; }

std::string_view to_string(Termination t) {
    switch (t) {
    case Termination::ResidualZero: return "residual_zero";
    case Termination::AllVariablesActive: return "all_variables_active";
    case Termination::StepLimit: return "step_limit";
    case Termination::Stalled: return "stalled";
    }
    return "?";
}

PathMethod parse_method(std::string_view name) {
    if (name == "stepwise" || name == "fs" || name == "forward-stepwise") return PathMethod::ForwardStepwise;
    if (name == "lasso") return PathMethod::Lasso;
    if (name == "lars" || name == "least-angle") return PathMethod::LeastAngle;
    throw InvalidArgument("unknown path method '" + std::string(name) + "' (expected stepwise, lasso or lars)");
}

int PathTrace::enter_count() const {
    return static_cast<int>(
        std::count_if(events.begin(), events.end(), [](const PathEvent& e) { return e.kind == EventKind::Enter; }));
}

namespace {

void check_inputs(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const PathOptions& options) {
    if (X.rows() != y.size())
        throw InvalidArgument("response has length " + std::to_string(y.size()) + " but X has " +
                              std::to_string(X.rows()) + " rows");
    if (X.cols() == 0 || X.rows() == 0) throw InvalidArgument("design matrix is empty");
    if (options.max_steps < 0) throw InvalidArgument("max_steps must be positive");
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        if (X.col(j).squaredNorm() == 0.0) throw InvalidArgument("column " + std::to_string(j) + " is zero");
}

class TraceBuilder {
public:
    TraceBuilder(PathMethod method, const PathOptions& options, int max_steps)
        : options_(options), max_steps_(max_steps) {
        trace_.method = method;
    }

    /// Returns true when the caller should stop after this event.
    bool emit(EventKind kind, int variable, double knot, int active_size, const Eigen::VectorXd& coef) {
        PathEvent e{static_cast<int>(trace_.events.size()) + 1, kind, variable, knot, active_size};
        trace_.events.push_back(e);
        trace_.knot_coefficients.push_back(coef);
        if (options_.stop_after && options_.stop_after(e)) {
            trace_.termination = Termination::StepLimit;
            return true;
        }
        if (static_cast<int>(trace_.events.size()) >= max_steps_) {
            trace_.termination = Termination::StepLimit;
            return true;
        }
        return false;
    }

    void finish(Termination t) { trace_.termination = t; }
    void stall() {
        trace_.termination = Termination::Stalled;
        trace_.stalled_step = static_cast<int>(trace_.events.size()) + 1;
    }
    [[nodiscard]] int next_step() const { return static_cast<int>(trace_.events.size()) + 1; }
    PathTrace take() { return std::move(trace_); }

private:
    const PathOptions& options_;
    int max_steps_;
    PathTrace trace_;
};

constexpr double kConditionLimit = 1e12;
constexpr int kRefactorEvery = 50;

PathTrace homotopy(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const PathOptions& options, bool lasso) {
    check_inputs(X, y, options);
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    const Eigen::Index full = std::min(n, p);
    const int max_steps = options.max_steps > 0 ? options.max_steps : static_cast<int>(8 * full);
    TraceBuilder out(lasso ? PathMethod::Lasso : PathMethod::LeastAngle, options, max_steps);

    const double ynorm = y.norm();
    if (ynorm == 0.0) {
        out.finish(Termination::ResidualZero);
        return out.take();
    }
    const double tie_tol = 1e-10 * ynorm;
    const double zero_resid = 1e-10 * ynorm;

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd resid = y;
    Eigen::VectorXd corr = X.transpose() * y;
    std::vector<Eigen::Index> active;
    std::vector<char> is_active(static_cast<std::size_t>(p), 0);
    Eigen::VectorXd signs;
    ActiveCholesky chol;

    auto refresh_residual = [&] {
        resid = y;
        for (Eigen::Index j : active) resid.noalias() -= beta[j] * X.col(j);
        corr.noalias() = X.transpose() * resid;
    };

    auto rebuild_factor = [&] {
        const Eigen::Index a = static_cast<Eigen::Index>(active.size());
        Eigen::MatrixXd gram(a, a);
        for (Eigen::Index i = 0; i < a; ++i)
            for (Eigen::Index k = 0; k <= i; ++k) gram(i, k) = gram(k, i) = X.col(active[i]).dot(X.col(active[k]));
        return chol.refactor(gram);
    };

    // Returns false when the active Gram matrix becomes numerically singular.
    auto add_variable = [&](Eigen::Index j) {
        const Eigen::Index a = static_cast<Eigen::Index>(active.size());
        Eigen::VectorXd cross(a);
        for (Eigen::Index i = 0; i < a; ++i) cross[i] = X.col(active[i]).dot(X.col(j));
        if (!chol.append(cross, X.col(j).squaredNorm())) return false;
        if (chol.condition_estimate() > kConditionLimit) {
            chol.remove(a);
            return false;
        }
        active.push_back(j);
        is_active[static_cast<std::size_t>(j)] = 1;
        signs.conservativeResize(a + 1);
        signs[a] = corr[j] >= 0.0 ? 1.0 : -1.0;
        if (chol.updates_since_refactor() >= kRefactorEvery && !rebuild_factor()) return false;
        return true;
    };

    double lambda = corr.cwiseAbs().maxCoeff();
    if (lambda <= 0.0) {
        out.finish(Termination::ResidualZero);
        return out.take();
    }
    Eigen::Index first = 0;
    for (Eigen::Index j = 0; j < p; ++j) {
        if (std::abs(corr[j]) >= lambda - tie_tol) {
            first = j;
            break;
        }
    }
    if (!add_variable(first)) {
        out.stall();
        return out.take();
    }
    if (out.emit(EventKind::Enter, static_cast<int>(first), lambda, 1, beta)) return out.take();

    // A just-dropped variable may not immediately re-enter with its old sign;
    // crossing the opposite boundary is still a genuine entry.
    Eigen::Index excluded = -1;
    double excluded_sign = 0.0;
    while (true) {
        if (static_cast<Eigen::Index>(active.size()) >= full) {
            out.finish(Termination::AllVariablesActive);
            break;
        }
        const Eigen::Index a = static_cast<Eigen::Index>(active.size());
        const Eigen::VectorXd w = chol.solve(signs);
        Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
        for (Eigen::Index i = 0; i < a; ++i) u.noalias() += w[i] * X.col(active[i]);
        const Eigen::VectorXd along = X.transpose() * u;

        // Entry: |corr_j - gamma * along_j| reaches lambda - gamma.
        double enter_gamma = std::numeric_limits<double>::infinity();
        Eigen::Index enter_j = -1;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (is_active[static_cast<std::size_t>(j)]) continue;
            double g = std::numeric_limits<double>::infinity();
            const double dm = 1.0 - along[j];
            const double dp = 1.0 + along[j];
            if (dm > 1e-14 && !(j == excluded && excluded_sign > 0))
                g = std::min(g, std::max(0.0, (lambda - corr[j]) / dm));
            if (dp > 1e-14 && !(j == excluded && excluded_sign < 0))
                g = std::min(g, std::max(0.0, (lambda + corr[j]) / dp));
            if (g < enter_gamma - tie_tol) {
                enter_gamma = g;
                enter_j = j;
            }
        }

        double drop_gamma = std::numeric_limits<double>::infinity();
        Eigen::Index drop_pos = -1;
        if (lasso) {
            for (Eigen::Index i = 0; i < a; ++i) {
                if (w[i] == 0.0) continue;
                const double g = -beta[active[i]] / w[i];
                if (g > 0.0 && g < drop_gamma) {
                    drop_gamma = g;
                    drop_pos = i;
                }
            }
        }

        const bool do_drop = drop_pos >= 0 && drop_gamma <= enter_gamma + 1e-12 * ynorm && drop_gamma < lambda;
        double gamma = do_drop ? drop_gamma : enter_gamma;
        if (!do_drop && (enter_j < 0 || gamma >= lambda)) {
            // No event before lambda reaches zero: finish at the least-squares fit.
            for (Eigen::Index i = 0; i < a; ++i) beta[active[i]] += lambda * w[i];
            refresh_residual();
            if (resid.norm() < zero_resid)
                out.finish(Termination::ResidualZero);
            else
                out.stall();
            break;
        }

        for (Eigen::Index i = 0; i < a; ++i) beta[active[i]] += gamma * w[i];
        lambda -= gamma;
        excluded = -1;

        if (do_drop) {
            const Eigen::Index j = active[drop_pos];
            const double dropped_sign = signs[drop_pos];
            beta[j] = 0.0;
            refresh_residual();
            chol.remove(drop_pos);
            active.erase(active.begin() + drop_pos);
            is_active[static_cast<std::size_t>(j)] = 0;
            for (Eigen::Index i = drop_pos; i + 1 < a; ++i) signs[i] = signs[i + 1];
            signs.conservativeResize(a - 1);
            if (chol.updates_since_refactor() >= kRefactorEvery && !rebuild_factor()) {
                out.stall();
                break;
            }
            excluded = j;
            excluded_sign = dropped_sign;
            if (out.emit(EventKind::Drop, static_cast<int>(j), lambda, static_cast<int>(active.size()), beta)) break;
        } else {
            refresh_residual();
            if (resid.norm() < zero_resid) {
                out.finish(Termination::ResidualZero);
                break;
            }
            if (!add_variable(enter_j)) {
                out.stall();
                break;
            }
            if (out.emit(EventKind::Enter, static_cast<int>(enter_j), lambda, static_cast<int>(active.size()), beta))
                break;
        }
        if (resid.norm() < zero_resid) {
            out.finish(Termination::ResidualZero);
            break;
        }
    }
    return out.take();
}

} // namespace

PathTrace lars_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const PathOptions& options) {
    return homotopy(X, y, options, false);
}

PathTrace lasso_lars_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const PathOptions& options) {
    return homotopy(X, y, options, true);
}

PathTrace forward_stepwise_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const PathOptions& options) {
    check_inputs(X, y, options);
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    const Eigen::Index full = std::min(n, p);
    if (options.max_steps > full)
        throw InvalidArgument("forward stepwise max_steps " + std::to_string(options.max_steps) +
                              " exceeds min(n, p) = " + std::to_string(full));
    const int max_steps = options.max_steps > 0 ? options.max_steps : static_cast<int>(full);
    TraceBuilder out(PathMethod::ForwardStepwise, options, max_steps);

    const double ynorm = y.norm();
    if (ynorm == 0.0) {
        out.finish(Termination::ResidualZero);
        return out.take();
    }
    const double tie_tol = 1e-10 * ynorm;

    const Eigen::VectorXd col_sq = X.colwise().squaredNorm().transpose();
    Eigen::MatrixXd Q(n, full);      // orthonormal basis of the active columns
    Eigen::MatrixXd QtX(full, p);    // rows q_i^T X
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(full, full);
    Eigen::VectorXd Qty(full);
    Eigen::VectorXd proj_sq = Eigen::VectorXd::Zero(p);
    std::vector<Eigen::Index> active;
    std::vector<char> excluded(static_cast<std::size_t>(p), 0); // active or collinear
    Eigen::VectorXd resid = y;
    double rss = resid.squaredNorm();

    auto residualize = [&](Eigen::Index j, Eigen::Index a) {
        Eigen::VectorXd v = X.col(j);
        Eigen::VectorXd coef = Eigen::VectorXd::Zero(a);
        for (int pass = 0; pass < 2 && a > 0; ++pass) {
            Eigen::VectorXd c = Q.leftCols(a).transpose() * v;
            v.noalias() -= Q.leftCols(a) * c;
            coef += c;
        }
        return std::make_pair(v, coef);
    };

    while (true) {
        const Eigen::Index a = static_cast<Eigen::Index>(active.size());
        if (a >= full) {
            out.finish(Termination::AllVariablesActive);
            break;
        }
        const Eigen::VectorXd corr = X.transpose() * resid;
        double best_score = -1.0;
        Eigen::Index best = -1;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (excluded[static_cast<std::size_t>(j)]) continue;
            double res_sq = col_sq[j] - proj_sq[j];
            if (res_sq < 1e-6 * col_sq[j]) res_sq = residualize(j, a).first.squaredNorm();
            if (std::sqrt(res_sq) < 1e-10 * std::sqrt(col_sq[j])) {
                excluded[static_cast<std::size_t>(j)] = 1;
                continue;
            }
            const double score = std::abs(corr[j]) / std::sqrt(res_sq);
            if (score > best_score + tie_tol) {
                best_score = score;
                best = j;
            }
        }
        if (best < 0 || best_score <= 0.0) {
            out.stall();
            break;
        }

        auto [v, coef] = residualize(best, a);
        const double vnorm = v.norm();
        Q.col(a) = v / vnorm;
        R.col(a).head(a) = coef;
        R(a, a) = vnorm;
        QtX.row(a).noalias() = Q.col(a).transpose() * X;
        proj_sq += QtX.row(a).transpose().cwiseAbs2();
        Qty[a] = Q.col(a).dot(y);
        resid.noalias() -= Q.col(a).dot(resid) * Q.col(a);
        active.push_back(best);
        excluded[static_cast<std::size_t>(best)] = 1;

        const double new_rss = resid.squaredNorm();
        if (!(new_rss < rss)) {
            out.stall();
            break;
        }
        rss = new_rss;

        Eigen::VectorXd b = R.topLeftCorner(a + 1, a + 1).triangularView<Eigen::Upper>().solve(Qty.head(a + 1));
        Eigen::VectorXd coefficients = Eigen::VectorXd::Zero(p);
        for (Eigen::Index i = 0; i <= a; ++i) coefficients[active[i]] = b[i];
        if (out.emit(EventKind::Enter, static_cast<int>(best), rss, static_cast<int>(a + 1), coefficients)) break;
        if (std::sqrt(rss) < 1e-10 * ynorm) {
            out.finish(Termination::ResidualZero);
            break;
        }
    }
    return out.take();
}

PathTrace run_path(PathMethod method, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const PathOptions& options) {
    switch (method) {
    case PathMethod::ForwardStepwise: return forward_stepwise_path(X, y, options);
    case PathMethod::Lasso: return lasso_lars_path(X, y, options);
    case PathMethod::LeastAngle: return lars_path(X, y, options);
    }
    throw InvalidArgument("unknown path method");
}

void write_trace_csv(std::ostream& os, const PathTrace& trace) {
    os << "step,event,variable,knot,active_size\n";
    for (const auto& e : trace.events) {
        os << e.step << ',' << to_string(e.kind) << ',' << e.variable << ',' << csv::format_double(e.knot) << ','
           << e.active_size << '\n';
    }
}

std::string trace_csv(const PathTrace& trace) {
    std::ostringstream os;
    write_trace_csv(os, trace);
    return os.str();
}

} // namespace sfv
