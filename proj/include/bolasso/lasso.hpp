#pragma once

#include "bolasso/types.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace bolasso {

// Lasso in moment form:  min_w  1/2 w'Qw - c'w + mu ||w||_1,
// which equals (1/2n)||y - Xw||^2 + mu ||w||_1 up to a constant when
// Q = X'X/n and c = X'y/n.

MomentForm compute_moments(const Dataset& data, bool with_spectrum = true);

/// Moment form from an explicit Gram matrix and linear term (the solver's Q-and-c entry point).
MomentForm make_moments(std::shared_ptr<const Matrix> gram, Vector linear, bool with_spectrum = true);

/// Same Gram matrix (and spectrum), different linear term.
MomentForm with_linear(const MomentForm& base, Vector linear);

struct PathOptions {
    /// Stop before the active set would exceed this size; negative means p.
    int max_active = -1;
    /// Do not trace the path below this level.
    double mu_floor = 0.0;
};

enum class PathStop : uint8_t { reached_zero, reached_floor, max_active, degenerate };

/// One linear piece of the path: on [mu_lo, mu_hi], w_active(mu) = intercept + mu * slope.
struct PathSegment {
    double mu_hi = 0.0;
    double mu_lo = 0.0;
    std::vector<int> active;
    std::vector<int8_t> active_signs;
    Vector intercept;
    Vector slope;
};

struct LassoSolution {
    Vector weights;
    double mu = 0.0;
    Support support;
    SignPattern signs;
    /// Element g of the l1 subdifferential at `weights` with Qw - c + mu g = 0 (zero when mu = 0).
    Vector subgradient;
    double kkt_residual = 0.0;
};

/// Piecewise-affine Lasso solution path. Immutable once built.
class RegularizationPath {
public:
    double mu_max() const noexcept { return mu_max_; }
    /// Lowest level covered by the path.
    double mu_end() const noexcept { return mu_end_; }
    bool terminated_degenerate() const noexcept { return stop_ == PathStop::degenerate; }
    PathStop stop_reason() const noexcept { return stop_; }
    const std::vector<PathSegment>& segments() const noexcept { return segments_; }
    /// mu_max, then every segment's lower end.
    std::vector<double> breakpoints() const;
    Eigen::Index dim() const noexcept { return moments_.dim(); }
    const MomentForm& moments() const noexcept { return moments_; }

    /// Exact evaluation of the path; throws RangeError below mu_end().
    LassoSolution solve_at(double mu) const;

    /// Active set of the lowest segment (empty for an all-zero path).
    Support last_support() const;
    /// Support at mu if covered, otherwise the last valid support.
    Support support_at_or_last(double mu, bool* covered = nullptr) const;

private:
    friend RegularizationPath lasso_path(const MomentForm&, const PathOptions&);

    MomentForm moments_;
    double mu_max_ = 0.0;
    double mu_end_ = 0.0;
    PathStop stop_ = PathStop::reached_zero;
    std::vector<PathSegment> segments_;
};

RegularizationPath lasso_path(const MomentForm& moments, const PathOptions& options = {});
RegularizationPath lasso_path(const Dataset& data, int max_active = -1);
RegularizationPath lasso_path(const Dataset& data, const PathOptions& options);

inline LassoSolution solve_at(const RegularizationPath& path, double mu) { return path.solve_at(mu); }

/// Largest violation of the Lasso optimality conditions at w.
double kkt_check(const MomentForm& moments, double mu, const Vector& w);
double kkt_check(const Dataset& data, double mu, const Vector& w);

/// Unregularized least squares on the support columns, zeros elsewhere.
Vector refit_ols(const Dataset& data, const Support& support);

/// (sqrt(p) mu + ||q||_2) / lambda_min(Q).
double error_bound(const MomentForm& moments, double mu, double q_norm);

/// -Q^{-1} g, so that w_hat - w_true = Q^{-1} q + mu * alpha_hat.
Vector alpha_hat(const MomentForm& moments, const LassoSolution& sol);

/// Running maximum of kkt_check over every solution produced by solve_at in this process.
struct KktAudit {
    double max_residual;
    uint64_t solutions;
};
KktAudit kkt_audit();
void reset_kkt_audit();

}  // namespace bolasso
