#include "sfv/predict.hpp"

#include <cmath>

#include "sfv/error.hpp"

namespace sfv {

std::string_view to_string(Regime r) { return r == Regime::BelowCutoff ? "below_cutoff" : "above_cutoff"; }

namespace {

void check(double n, double p, double k) {
    if (!(n >= 1.0) || !(p >= 2.0) || !(k > 0.0))
        throw InvalidArgument("prediction needs n >= 1, p >= 2 and k > 0");
}

} // namespace

double predicted_log_rank(double n, double p, double k) {
    check(n, p, k);
    const double lp = std::log(p);
    return std::sqrt(2.0 * n * lp / k) - n / (2.0 * k) + std::log(n / (2.0 * p * lp));
}

double predicted_log_rank_square_form(double n, double p, double k) {
    check(n, p, k);
    const double lp = std::log(p);
    const double gap = std::sqrt(lp) - std::sqrt(n / (2.0 * k));
    return -gap * gap + std::log(n / (2.0 * lp));
}

double sparsity_cutoff(double n, double p) {
    if (!(p >= 2.0)) throw InvalidArgument("cutoff needs p >= 2");
    return n / (2.0 * std::log(p));
}

Prediction predicted_rank(int n, int p, double k) {
    Prediction out;
    out.n = n;
    out.p = p;
    out.k = k;
    out.cutoff = sparsity_cutoff(n, p);
    out.log_rank = predicted_log_rank(n, p, k);
    if (k <= out.cutoff) {
        out.regime = Regime::BelowCutoff;
        out.rank = k + 1.0;
    } else {
        out.regime = Regime::AboveCutoff;
        out.rank = std::exp(out.log_rank);
    }
    return out;
}

double linear_sparsity_bound(double p, double epsilon, double delta) {
    if (!(p >= 2.0) || !(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0))
        throw InvalidArgument("linear sparsity bound needs p >= 2, epsilon in (0,1), delta > 0");
    return std::exp(std::sqrt(2.0 * delta * std::log(p) / epsilon));
}

OrderStatApprox normal_order_stat_approx(double m, double i) {
    if (!(i >= 1.0) || !(m > i)) throw InvalidArgument("order statistic approximation needs 1 <= i < m");
    const double l = std::log(m / i);
    const double lead = std::sqrt(2.0 * l);
    if (l <= 1.0 + 1e-12) return {lead, true};
    return {lead - std::log(l) / (2.0 * lead), false};
}

} // namespace sfv
