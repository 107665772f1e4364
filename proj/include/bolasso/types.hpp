#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace bolasso {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Sorted, duplicate-free list of 0-based variable indices.
using Support = std::vector<int>;

/// Ternary sign vector in {-1, 0, +1}^p.
using SignPattern = std::vector<int8_t>;

/// Design matrix (n x p) and response (n).
struct Dataset {
    Matrix X;
    Vector y;

    Dataset() = default;
    Dataset(Matrix x, Vector resp);

    Eigen::Index rows() const noexcept { return X.rows(); }
    Eigen::Index cols() const noexcept { return X.cols(); }

    /// max_i ||x_i||_inf
    double row_bound() const;

    /// Throws InputError unless n, p >= 1, y has n entries and every entry is finite.
    void validate() const;
};

/// Second-order moments Q = X'X/n and linear term c = X'y/n.
///
/// The Gram matrix is shared so that replicates with a fixed design (residual
/// bootstrap, noise resampling) can reuse it without copying.
struct MomentForm {
    std::shared_ptr<const Matrix> gram;
    Vector linear;
    /// Smallest eigenvalue of the Gram matrix; empty when the spectrum was not computed.
    std::optional<double> lambda_min;
    std::optional<double> lambda_max;

    Eigen::Index dim() const noexcept { return linear.size(); }
    const Matrix& Q() const noexcept { return *gram; }
    const Vector& c() const noexcept { return linear; }

    /// lambda_min > rank tolerance; false when the spectrum is unknown.
    bool full_rank() const noexcept;
    double rank_tolerance() const noexcept;
};

/// Relative tolerance for declaring a symmetric PSD matrix singular.
inline constexpr double kRankTolerance = 1e-10;

/// Coefficient j is treated as zero iff |w_j| <= kZeroThreshold * max(1, ||w||_inf).
inline constexpr double kZeroThreshold = 1e-12;

Support support_of(const Vector& w);
SignPattern signs_of(const Vector& w);

/// Submatrix / subvector helpers over index lists.
Matrix submatrix(const Matrix& A, const std::vector<int>& rows, const std::vector<int>& cols);
Vector subvector(const Vector& v, const std::vector<int>& idx);
Matrix select_columns(const Matrix& A, const std::vector<int>& cols);

/// Indices in {0..p-1} not in `s` (s must be sorted).
Support complement(const Support& s, int p);

}  // namespace bolasso
