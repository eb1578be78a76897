#include "sfv/rankstat.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "sfv/error.hpp"

namespace sfv {

namespace {

std::vector<char> membership(const std::vector<int>& support, int p) {
    std::vector<char> in(static_cast<std::size_t>(std::max(p, 0)), 0);
    for (int j : support) {
        if (j < 0 || j >= p) throw InvalidArgument("support index " + std::to_string(j) + " out of range");
        in[static_cast<std::size_t>(j)] = 1;
    }
    return in;
}

} // namespace

RankReport first_spurious_rank(const PathTrace& trace, const std::vector<int>& support) {
    const std::unordered_set<int> in_support(support.begin(), support.end());
    RankReport report;
    report.labeled_events.reserve(trace.events.size());
    int enters = 0;
    int drops = 0;
    for (const auto& e : trace.events) {
        const bool signal = in_support.count(e.variable) > 0;
        report.labeled_events.push_back({e, signal});
        if (report.T) continue;
        if (e.kind == EventKind::Drop) {
            ++drops;
            continue;
        }
        ++enters;
        if (!signal) {
            report.T = enters;
            report.first_noise_variable = e.variable;
            report.drops_before_first_noise = drops;
        } else {
            ++report.signals_before;
        }
    }
    if (!report.T) report.drops_before_first_noise = drops;
    return report;
}

std::function<bool(const PathEvent&)> stop_at_first_noise(const std::vector<int>& support, int p) {
    auto in = membership(support, p);
    return [in = std::move(in)](const PathEvent& e) {
        return e.kind == EventKind::Enter && !in[static_cast<std::size_t>(e.variable)];
    };
}

GammaStat compute_gamma(const Dataset& data) {
    if (data.support.empty()) throw InvalidArgument("the alignment statistic needs a nonempty support");
    const double magnitude = std::abs(data.beta[data.support.front()]);
    for (int j : data.support) {
        if (std::abs(data.beta[j]) != magnitude)
            throw InvalidArgument("the alignment statistic is defined only when all signals share one magnitude");
    }
    const double k = static_cast<double>(data.support.size());
    const double ynorm = data.y.norm();
    if (ynorm == 0.0) throw NumericalError("the alignment statistic is undefined for a zero response");
    const double aligned = (data.X * data.beta).dot(data.y);
    return {aligned / (std::sqrt(k) * magnitude * ynorm), ynorm / std::sqrt(k)};
}

ResidualProfile residual_inner_profile(const Dataset& data, const PathTrace& trace, int at_rank) {
    if (at_rank < 1) throw InvalidArgument("rank must be at least 1");
    int seen = 0;
    std::optional<std::size_t> enter_index;
    for (std::size_t i = 0; i < trace.events.size(); ++i) {
        if (trace.events[i].kind != EventKind::Enter) continue;
        if (++seen == at_rank) {
            enter_index = i;
            break;
        }
    }
    if (!enter_index)
        throw InvalidArgument("rank " + std::to_string(at_rank) + " exceeds the " + std::to_string(seen) +
                              " variables entered along the path");

    Eigen::VectorXd coef;
    if (trace.method == PathMethod::ForwardStepwise) {
        // Stepwise knots store the refit after the step, so the state just
        // before this entry is the previous event's fit.
        coef = *enter_index > 0 ? trace.knot_coefficients[*enter_index - 1] : Eigen::VectorXd::Zero(data.p());
    } else {
        coef = trace.knot_coefficients[*enter_index];
    }

    const Eigen::VectorXd resid = data.y - data.X * coef;
    const Eigen::VectorXd inner = (data.X.transpose() * resid).cwiseAbs();
    auto in = membership(data.support, data.p());

    ResidualProfile out;
    std::vector<double> on;
    for (Eigen::Index j = 0; j < inner.size(); ++j) {
        if (in[static_cast<std::size_t>(j)])
            on.push_back(inner[j]);
        else
            out.max_offsupport = std::max(out.max_offsupport, inner[j]);
    }
    std::sort(on.begin(), on.end());
    if (!on.empty()) {
        for (int d = 1; d <= 9; ++d) {
            const double h = (static_cast<double>(on.size()) - 1.0) * d / 10.0;
            const auto lo = static_cast<std::size_t>(std::floor(h));
            const auto hi = std::min(lo + 1, on.size() - 1);
            out.onsupport_deciles.push_back(on[lo] + (h - static_cast<double>(lo)) * (on[hi] - on[lo]));
        }
    }
    return out;
}

std::string rank_csv_header() { return "method,seed,k,T,signals_before,drops_before_first_noise"; }

std::string rank_csv_row(PathMethod method, std::optional<std::uint64_t> seed, int k, const RankReport& report) {
    std::string row(to_string(method));
    row += ',';
    if (seed) row += std::to_string(*seed);
    row += ',' + std::to_string(k) + ',';
    if (report.T) row += std::to_string(*report.T);
    row += ',' + std::to_string(report.signals_before) + ',' + std::to_string(report.drops_before_first_noise);
    return row;
}

} // namespace sfv
