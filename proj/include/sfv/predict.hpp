#pragma once

#include <string>
#include <string_view>

namespace sfv {

enum class Regime { BelowCutoff, AboveCutoff };

std::string_view to_string(Regime r);

struct Prediction {
    int n = 0;
    int p = 0;
    double k = 0.0;
    double log_rank = 0.0;
    double rank = 0.0;
    Regime regime = Regime::BelowCutoff;
    double cutoff = 0.0; ///< n / (2 ln p)
};

/// sqrt(2 n ln p / k) - n / (2k) + ln(n / (2 p ln p)), natural logarithms.
/// `k` may be real-valued.
double predicted_log_rank(double n, double p, double k);

/// The same quantity in completed-square form,
/// -(sqrt(ln p) - sqrt(n / (2k)))^2 + ln(n / (2 ln p)).
double predicted_log_rank_square_form(double n, double p, double k);

double sparsity_cutoff(double n, double p);

/// k + 1 at or below the cutoff; exp(predicted_log_rank) above it.
Prediction predicted_rank(int n, int p, double k);

/// exp(sqrt(2 delta ln p / epsilon)) for k/p -> epsilon, n/p -> delta.
double linear_sparsity_bound(double p, double epsilon, double delta);

struct OrderStatApprox {
    double value = 0.0;
    /// Set when ln ln(m/i) is undefined (m/i <= e) and the correction term
    /// was dropped.
    bool correction_dropped = false;
};

/// sqrt(2 ln(m/i)) - ln ln(m/i) / (2 sqrt(2 ln(m/i))), the approximate i-th
/// largest of m standard normals. Meaningful only for small i/m.
OrderStatApprox normal_order_stat_approx(double m, double i);

} // namespace sfv
