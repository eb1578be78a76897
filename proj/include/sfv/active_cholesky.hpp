#pragma once

#include <Eigen/Dense>

namespace sfv {

/// Lower Cholesky factor of the Gram matrix of an ordered active set,
/// updated in O(a^2) when a column is appended or removed.
class ActiveCholesky {
public:
    /// Appends a column with cross products `cross` (against the current
    /// active columns, in order) and squared norm `self`. Returns false and
    /// leaves the factor unchanged when the new pivot is not positive.
    bool append(const Eigen::VectorXd& cross, double self);

    /// Removes the active column at position `index`, restoring the
    /// triangular form with Givens rotations.
    void remove(Eigen::Index index);

    /// Replaces the factor by a fresh factorization of `gram`.
    bool refactor(const Eigen::MatrixXd& gram);

    /// Solves G x = rhs.
    [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

    /// (max pivot / min pivot)^2, a cheap lower bound on cond(G).
    [[nodiscard]] double condition_estimate() const;

    [[nodiscard]] Eigen::Index size() const { return size_; }
    [[nodiscard]] int updates_since_refactor() const { return updates_; }
    [[nodiscard]] Eigen::MatrixXd factor() const { return L_.topLeftCorner(size_, size_); }

private:
    void reserve(Eigen::Index n);

    Eigen::MatrixXd L_;
    Eigen::Index size_ = 0;
    int updates_ = 0;
};

} // namespace sfv
