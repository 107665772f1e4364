#pragma once

#include "bolasso/types.hpp"

#include <limits>

namespace bolasso {

struct GroundTruth {
    Vector w_true;
    Support J;
    /// Signs of w_true on J, in the order of J.
    SignPattern s_bar;
    double w_min = 0.0;
};

/// Throws InputError on non-finite entries.
GroundTruth make_truth(const Vector& w_true);

struct DiagnosticsReport {
    double cond_value = 0.0;
    Vector delta;
    Support K;
    Support L;
    /// Length p; zero outside L and at hinge indices of K.
    SignPattern t;
    /// Indices of K that entered only through a tight inequality (Delta_k = 0).
    Support hinge;
    /// The reduced problem's path stopped above level 1 (solution not unique).
    bool reduced_degenerate = false;
    double lmin_LL = 0.0;
    /// ||Q_{Lc,L} Q_{L,L}^{-1} t_L||_inf (0 when Lc is empty).
    double stability_norm = 0.0;
    double theta = std::numeric_limits<double>::quiet_NaN();
    bool a5_holds = false;
    bool a6_holds = false;
};

inline constexpr double kTightTolerance = 1e-9;

/// ||Q_{Jc,J} Q_{J,J}^{-1} s_J||_inf. Throws SingularError when Q_{J,J} is singular.
double consistency_condition(const MomentForm& moments, const GroundTruth& truth);

/// Solves the local noiseless problem through its reduced Lasso form and fills
/// cond_value, delta, K, L, t, hinge and reduced_degenerate.
DiagnosticsReport local_problem(const MomentForm& moments, const GroundTruth& truth);

/// min(1 - ||Q_{Lc,L} Q_{L,L}^{-1} t_L||_inf, min_{k in K} |(Q_{L,L}^{-1} t_L)_k Q_kk|).
/// Throws SingularError when Q_{L,L} is singular.
double stability_theta(const MomentForm& moments, const DiagnosticsReport& report);

/// local_problem plus the (A5)/(A6) verdicts; theta is set only when both hold.
DiagnosticsReport assumption_check(const MomentForm& moments, const GroundTruth& truth);

}  // namespace bolasso
