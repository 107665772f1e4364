#pragma once

#include "bolasso/types.hpp"

#include <vector>

namespace bolasso {

/// Cholesky factor L (Q_AA = L L') of a Gram submatrix that grows and shrinks
/// one index at a time.
class ActiveCholesky {
public:
    explicit ActiveCholesky(const Matrix& gram);

    int size() const noexcept { return static_cast<int>(index_.size()); }
    const std::vector<int>& indices() const noexcept { return index_; }

    /// Appends variable j. Returns false (and leaves the factor unchanged) when the
    /// enlarged submatrix is numerically singular.
    bool append(int j);
    /// Removes the variable at position pos via Givens rotations.
    void remove_at(int pos);
    /// Refactors Q_AA for the given index list. Returns false if singular.
    bool rebuild(const std::vector<int>& indices);

    /// Solves Q_AA x = rhs with one step of iterative refinement.
    Vector solve(const Vector& rhs) const;

    Matrix factor() const { return L_.topLeftCorner(size(), size()); }

    /// Pivot (sqrt of Schur complement) below which the factor is rebuilt from scratch.
    static constexpr double kPivotRebuild = 1e-12;

private:
    Vector solve_once(const Vector& rhs) const;
    bool singular(const std::vector<int>& indices) const;

    const Matrix& gram_;
    Matrix L_;
    std::vector<int> index_;
};

}  // namespace bolasso
