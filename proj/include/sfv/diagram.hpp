#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sfv/seqpath.hpp"

namespace sfv {

struct DiagramRow {
    int variable = 0;
    std::optional<int> h_rank; ///< Enter position along the path
    int v_rank = 0;            ///< rank of |t| among all variables, 1 = largest
    double t_stat = 0.0;
    bool is_signal = false;
};

struct DiagramTable {
    std::vector<DiagramRow> rows; ///< indexed by variable
};

/// |beta_ls_j| / sqrt([(X^T X)^{-1}]_jj), i.e. t-values up to the unknown
/// noise level. Requires n > p and a well-conditioned Gram matrix.
Eigen::VectorXd least_squares_tstats(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

DiagramTable double_ranking(const PathTrace& trace, const Eigen::VectorXd& tstats, const std::vector<int>& support);

struct SeparationCheck {
    bool holds = false;
    double delta = 0.0;
    double threshold = 0.0; ///< 3 sqrt(2 delta ln p / (delta - 1))
};

/// Signal-to-noise condition under which the first noise variable ranks
/// below every signal in the least-squares ordering.
SeparationCheck separation_condition(int n, int p, double m_over_sigma);

/// CSV columns: variable,h_rank,v_rank,t_stat,is_signal.
void write_diagram_csv(std::ostream& os, const DiagramTable& table);
std::string diagram_csv(const DiagramTable& table);

/// Horizontal rank on x, vertical rank on y; the first `marked_noise` noise
/// variables along the path are drawn as crosses, signals as dots, other
/// noise as triangles. Never-entered variables sit in a right-hand band.
std::string diagram_svg(const DiagramTable& table, int marked_noise = 5);

} // namespace sfv
