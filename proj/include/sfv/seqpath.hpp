#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "sfv/design.hpp"

namespace sfv {

enum class PathMethod { ForwardStepwise, Lasso, LeastAngle };
enum class EventKind { Enter, Drop };
enum class Termination { ResidualZero, AllVariablesActive, StepLimit, Stalled };

std::string_view to_string(PathMethod m);
std::string_view to_string(EventKind k);
std::string_view to_string(Termination t);
/// Accepts "stepwise"/"fs", "lasso", "lars"/"least-angle" (case-sensitive).
PathMethod parse_method(std::string_view name);

struct PathEvent {
    int step = 0; ///< 1-based
    EventKind kind = EventKind::Enter;
    int variable = 0;
    /// lambda at the event for lasso/LARS; residual sum of squares after the
    /// step for forward stepwise.
    double knot = 0.0;
    int active_size = 0; ///< after the event
};

struct PathTrace {
    PathMethod method = PathMethod::LeastAngle;
    std::vector<PathEvent> events;
    /// One coefficient vector per event. For lasso/LARS this is the solution
    /// at the event's lambda; for forward stepwise the refit after the step.
    std::vector<Eigen::VectorXd> knot_coefficients;
    Termination termination = Termination::StepLimit;
    /// Step at which the path broke down, when termination == Stalled.
    std::optional<int> stalled_step;

    [[nodiscard]] int enter_count() const;
};

struct PathOptions {
    /// Event budget; 0 selects the method default (min(n,p) for stepwise,
    /// 8 min(n,p) for lasso and LARS).
    int max_steps = 0;
    /// Stop right after an event for which this returns true. Reported as
    /// Termination::StepLimit.
    std::function<bool(const PathEvent&)> stop_after;
};

/// Least angle regression on raw inner products X^T r. Enter events only.
PathTrace lars_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const PathOptions& options = {});

/// The lasso path computed by LARS with the drop-out modification.
PathTrace lasso_lars_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const PathOptions& options = {});

/// Greedy forward stepwise regression without intercept.
PathTrace forward_stepwise_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const PathOptions& options = {});

PathTrace run_path(PathMethod method, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const PathOptions& options = {});

inline PathTrace run_path(PathMethod method, const Dataset& data, const PathOptions& options = {}) {
    return run_path(method, data.X, data.y, options);
}

/// CSV columns: step,event,variable,knot,active_size.
void write_trace_csv(std::ostream& os, const PathTrace& trace);
std::string trace_csv(const PathTrace& trace);

} // namespace sfv
