#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sfv/design.hpp"
#include "sfv/seqpath.hpp"

namespace sfv {

struct LabeledEvent {
    PathEvent event;
    bool is_signal = false;
};

struct RankReport {
    /// 1-based position of the first noise Enter among Enter events.
    std::optional<int> T;
    std::optional<int> first_noise_variable;
    int signals_before = 0;
    int drops_before_first_noise = 0;
    std::vector<LabeledEvent> labeled_events;
};

/// Counts Enter events positionally; a variable that drops and re-enters is
/// counted again at its re-entry.
RankReport first_spurious_rank(const PathTrace& trace, const std::vector<int>& support);

/// Stop predicate that ends a path at the first Enter outside `support`.
std::function<bool(const PathEvent&)> stop_at_first_noise(const std::vector<int>& support, int p);

struct GammaStat {
    double gamma = 0.0;
    double d = 0.0; ///< ||y|| / sqrt(k)
};

/// Alignment statistic beta^T X^T y / (sqrt(k) M ||y||) for the
/// one-magnitude model, with M taken as the common |beta_j|.
GammaStat compute_gamma(const Dataset& data);

struct ResidualProfile {
    double max_offsupport = 0.0;
    std::vector<double> onsupport_deciles; ///< 10%, 20%, ..., 90%
};

/// Inner products |X_j^T r| for the residual at the knot where the
/// `at_rank`-th variable enters (before it has moved off zero).
ResidualProfile residual_inner_profile(const Dataset& data, const PathTrace& trace, int at_rank);

/// CSV header and row: method,seed,k,T,signals_before,drops_before_first_noise.
std::string rank_csv_header();
std::string rank_csv_row(PathMethod method, std::optional<std::uint64_t> seed, int k, const RankReport& report);

} // namespace sfv
