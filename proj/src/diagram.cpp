#include "sfv/diagram.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "sfv/csv.hpp"
#include "sfv/error.hpp"
#include "sfv/svg.hpp"

namespace sfv {

Eigen::VectorXd least_squares_tstats(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (n <= p)
        throw InvalidArgument("vertical ranking requires n > p (got n=" + std::to_string(n) +
                              ", p=" + std::to_string(p) + ")");
    if (y.size() != n) throw InvalidArgument("response length does not match the design");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    const auto R = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const Eigen::VectorXd rdiag = qr.matrixR().diagonal().head(p).cwiseAbs();
    const double ratio = rdiag.minCoeff() > 0.0 ? rdiag.maxCoeff() / rdiag.minCoeff() : INFINITY;
    if (!(ratio * ratio < 1e12)) throw NumericalError("the Gram matrix X^T X is numerically singular");

    const Eigen::VectorXd beta = qr.solve(y);
    // diag((X^T X)^{-1}) in pivoted order equals the squared row norms of R^{-1}.
    const Eigen::MatrixXd rinv = R.solve(Eigen::MatrixXd::Identity(p, p));
    const Eigen::VectorXd pivoted_diag = rinv.rowwise().squaredNorm();
    const auto& perm = qr.colsPermutation().indices();

    Eigen::VectorXd t(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const Eigen::Index j = perm[i];
        t[j] = std::abs(beta[j]) / std::sqrt(pivoted_diag[i]);
    }
    return t;
}

DiagramTable double_ranking(const PathTrace& trace, const Eigen::VectorXd& tstats, const std::vector<int>& support) {
    const int p = static_cast<int>(tstats.size());
    DiagramTable table;
    table.rows.resize(static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j) {
        table.rows[static_cast<std::size_t>(j)].variable = j;
        table.rows[static_cast<std::size_t>(j)].t_stat = tstats[j];
    }
    for (int j : support) {
        if (j < 0 || j >= p) throw InvalidArgument("support index " + std::to_string(j) + " out of range");
        table.rows[static_cast<std::size_t>(j)].is_signal = true;
    }

    int position = 0;
    for (const auto& e : trace.events) {
        if (e.kind != EventKind::Enter) continue;
        ++position;
        if (e.variable < 0 || e.variable >= p)
            throw InvalidArgument("trace variable " + std::to_string(e.variable) + " out of range");
        auto& row = table.rows[static_cast<std::size_t>(e.variable)];
        if (!row.h_rank) row.h_rank = position;
    }

    std::vector<int> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return std::abs(tstats[a]) > std::abs(tstats[b]); });
    for (int r = 0; r < p; ++r) table.rows[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])].v_rank = r + 1;
    return table;
}

SeparationCheck separation_condition(int n, int p, double m_over_sigma) {
    if (n <= p) throw InvalidArgument("the separation condition requires n > p");
    if (p < 2) throw InvalidArgument("the separation condition requires p >= 2");
    SeparationCheck out;
    out.delta = static_cast<double>(n) / p;
    out.threshold = 3.0 * std::sqrt(2.0 * out.delta * std::log(static_cast<double>(p)) / (out.delta - 1.0));
    out.holds = m_over_sigma > out.threshold;
    return out;
}

void write_diagram_csv(std::ostream& os, const DiagramTable& table) {
    os << "variable,h_rank,v_rank,t_stat,is_signal\n";
    for (const auto& r : table.rows) {
        os << r.variable << ',';
        if (r.h_rank) os << *r.h_rank;
        os << ',' << r.v_rank << ',' << csv::format_double(r.t_stat) << ',' << (r.is_signal ? 1 : 0) << '\n';
    }
}

std::string diagram_csv(const DiagramTable& table) {
    std::ostringstream os;
    write_diagram_csv(os, table);
    return os.str();
}

std::string diagram_svg(const DiagramTable& table, int marked_noise) {
    int max_h = 0;
    for (const auto& r : table.rows)
        if (r.h_rank) max_h = std::max(max_h, *r.h_rank);

    std::vector<const DiagramRow*> noise_by_entry;
    for (const auto& r : table.rows)
        if (!r.is_signal && r.h_rank) noise_by_entry.push_back(&r);
    std::sort(noise_by_entry.begin(), noise_by_entry.end(),
              [](const DiagramRow* a, const DiagramRow* b) { return *a->h_rank < *b->h_rank; });
    std::vector<char> crossed(table.rows.size(), 0);
    for (std::size_t i = 0; i < noise_by_entry.size() && static_cast<int>(i) < marked_noise; ++i)
        crossed[static_cast<std::size_t>(noise_by_entry[i]->variable)] = 1;

    svg::Plot plot;
    plot.title = "Double-ranking diagram";
    plot.x_label = "rank along the path";
    plot.y_label = "least-squares rank";
    plot.legend = {"signal", "noise", "first noise entries"};
    const double band_x = max_h + std::max(2.0, 0.08 * max_h);
    bool any_absent = false;
    for (const auto& r : table.rows) {
        svg::Point pt;
        pt.y = r.v_rank;
        if (r.h_rank) {
            pt.x = *r.h_rank;
        } else {
            pt.x = band_x;
            any_absent = true;
        }
        pt.marker = crossed[static_cast<std::size_t>(r.variable)] ? svg::Marker::Cross
                    : r.is_signal                                  ? svg::Marker::Dot
                                                                   : svg::Marker::Triangle;
        plot.points.push_back(pt);
    }
    if (any_absent) {
        plot.band_from_x = band_x;
        plot.band_label = "not entered";
    }
    return svg::render_scatter(plot);
}

} // namespace sfv
