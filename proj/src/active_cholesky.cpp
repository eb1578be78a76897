#include "sfv/active_cholesky.hpp"

#include <algorithm>
#include <cmath>

namespace sfv {

void ActiveCholesky::reserve(Eigen::Index n) {
    if (L_.rows() >= n) return;
    Eigen::Index cap = std::max<Eigen::Index>(n, 2 * L_.rows() + 8);
    Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(cap, cap);
    grown.topLeftCorner(size_, size_) = L_.topLeftCorner(size_, size_);
    L_.swap(grown);
}

bool ActiveCholesky::append(const Eigen::VectorXd& cross, double self) {
    Eigen::VectorXd l = cross;
    if (size_ > 0)
        L_.topLeftCorner(size_, size_).triangularView<Eigen::Lower>().solveInPlace(l);
    const double pivot_sq = self - (size_ > 0 ? l.squaredNorm() : 0.0);
    if (!(pivot_sq > 0.0)) return false;
    reserve(size_ + 1);
    L_.row(size_).head(size_) = l.transpose();
    L_.row(size_).tail(L_.cols() - size_).setZero();
    L_(size_, size_) = std::sqrt(pivot_sq);
    ++size_;
    ++updates_;
    return true;
}

void ActiveCholesky::remove(Eigen::Index index) {
    const Eigen::Index a = size_;
    // Shift rows below `index` up; the result is lower triangular except for
    // one superdiagonal entry per shifted row.
    for (Eigen::Index i = index; i + 1 < a; ++i) L_.row(i).head(a) = L_.row(i + 1).head(a);
    L_.row(a - 1).setZero();
    for (Eigen::Index k = index; k + 1 < a; ++k) {
        const double x = L_(k, k);
        const double z = L_(k, k + 1);
        if (z == 0.0) continue;
        const double r = std::hypot(x, z);
        const double c = x / r;
        const double s = z / r;
        for (Eigen::Index i = k; i + 1 < a; ++i) {
            const double u = L_(i, k);
            const double v = L_(i, k + 1);
            L_(i, k) = c * u + s * v;
            L_(i, k + 1) = -s * u + c * v;
        }
        L_(k, k + 1) = 0.0;
    }
    for (Eigen::Index k = index; k + 1 < a; ++k) {
        if (L_(k, k) < 0.0) L_.col(k).segment(k, a - 1 - k) *= -1.0;
    }
    L_.col(a - 1).setZero();
    --size_;
    ++updates_;
}

bool ActiveCholesky::refactor(const Eigen::MatrixXd& gram) {
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) return false;
    const Eigen::Index a = gram.rows();
    L_ = Eigen::MatrixXd::Zero(std::max<Eigen::Index>(a, L_.rows()), std::max<Eigen::Index>(a, L_.rows()));
    L_.topLeftCorner(a, a) = llt.matrixL();
    size_ = a;
    updates_ = 0;
    return true;
}

Eigen::VectorXd ActiveCholesky::solve(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd x = rhs;
    auto L = L_.topLeftCorner(size_, size_);
    L.triangularView<Eigen::Lower>().solveInPlace(x);
    L.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
    return x;
}

double ActiveCholesky::condition_estimate() const {
    if (size_ == 0) return 1.0;
    auto d = L_.topLeftCorner(size_, size_).diagonal().cwiseAbs();
    const double ratio = d.maxCoeff() / d.minCoeff();
    return ratio * ratio;
}

} // namespace sfv
