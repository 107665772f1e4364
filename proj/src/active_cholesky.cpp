#include "bolasso/active_cholesky.hpp"

#include <algorithm>
#include <cmath>

namespace bolasso {

ActiveCholesky::ActiveCholesky(const Matrix& gram) : gram_(gram) {
    const Eigen::Index cap = std::min<Eigen::Index>(gram.rows(), 16);
    L_.setZero(cap, cap);
}

bool ActiveCholesky::singular(const std::vector<int>& indices) const {
    if (indices.empty()) return false;
    const Matrix sub = submatrix(gram_, indices, indices);
    Eigen::SelfAdjointEigenSolver<Matrix> es(sub, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    return !(lo > kRankTolerance * std::max(1.0, hi));
}

bool ActiveCholesky::append(int j) {
    const int k = size();
    if (L_.rows() < k + 1) {
        const Eigen::Index cap = std::min<Eigen::Index>(gram_.rows(), std::max<Eigen::Index>(2 * L_.rows(), k + 1));
        Matrix grown = Matrix::Zero(cap, cap);
        grown.topLeftCorner(k, k) = L_.topLeftCorner(k, k);
        L_.swap(grown);
    }
    Vector col(k);
    for (int i = 0; i < k; ++i) col[i] = gram_(index_[i], j);
    Vector l = col;
    if (k > 0) L_.topLeftCorner(k, k).triangularView<Eigen::Lower>().solveInPlace(l);
    const double diag = gram_(j, j);
    const double schur = diag - l.squaredNorm();
    const bool suspicious = !(schur > 0.0) || std::sqrt(schur) < kPivotRebuild ||
                            schur < kRankTolerance * std::max(1.0, diag);
    if (suspicious) {
        std::vector<int> grown = index_;
        grown.push_back(j);
        if (singular(grown)) return false;
        return rebuild(grown);
    }
    L_.block(k, 0, 1, k) = l.transpose();
    L_(k, k) = std::sqrt(schur);
    index_.push_back(j);
    return true;
}

void ActiveCholesky::remove_at(int pos) {
    const int k = size();
    // Drop row pos; the trailing rows then carry one entry right of the
    // diagonal, which column rotations push into the last column.
    for (int i = pos; i < k - 1; ++i) L_.row(i).head(k) = L_.row(i + 1).head(k);
    L_.row(k - 1).setZero();
    for (int i = pos; i < k - 1; ++i) {
        const double a = L_(i, i);
        const double b = L_(i, i + 1);
        const double r = std::hypot(a, b);
        if (r == 0.0) continue;
        const double cs = a / r;
        const double sn = b / r;
        for (int row = i; row < k - 1; ++row) {
            const double u = L_(row, i);
            const double v = L_(row, i + 1);
            L_(row, i) = cs * u + sn * v;
            L_(row, i + 1) = -sn * u + cs * v;
        }
    }
    for (int i = 0; i < k - 1; ++i) {
        if (L_(i, i) < 0.0) L_.col(i).segment(i, k - 1 - i) *= -1.0;
    }
    L_.col(k - 1).setZero();
    index_.erase(index_.begin() + pos);
}

bool ActiveCholesky::rebuild(const std::vector<int>& indices) {
    const auto k = static_cast<Eigen::Index>(indices.size());
    if (L_.rows() < k) L_.setZero(k, k);
    L_.setZero();
    if (k == 0) {
        index_.clear();
        return true;
    }
    Eigen::LLT<Matrix> llt(submatrix(gram_, indices, indices));
    if (llt.info() != Eigen::Success) return false;
    L_.topLeftCorner(k, k) = llt.matrixL();
    index_ = indices;
    return true;
}

Vector ActiveCholesky::solve_once(const Vector& rhs) const {
    const int k = size();
    Vector x = rhs;
    auto L = L_.topLeftCorner(k, k);
    L.triangularView<Eigen::Lower>().solveInPlace(x);
    L.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
    return x;
}

Vector ActiveCholesky::solve(const Vector& rhs) const {
    const int k = size();
    if (k == 0) return Vector();
    Vector x = solve_once(rhs);
    Vector resid = rhs;
    for (int i = 0; i < k; ++i) {
        double acc = 0.0;
        for (int l = 0; l < k; ++l) acc += gram_(index_[i], index_[l]) * x[l];
        resid[i] -= acc;
    }
    x += solve_once(resid);
    return x;
}

}  // namespace bolasso
