#pragma once

#include "bolasso/resampling.hpp"
#include "bolasso/types.hpp"

#include <optional>
#include <vector>

namespace bolasso {

/// Generating model needed by the oracle_noise scheme.
struct OracleNoise {
    Vector w_true;
    double sigma = 1.0;
};

struct SelectionOptions {
    int workers = 1;
    std::optional<OracleNoise> oracle;
};

struct SelectionRun {
    double mu = 0.0;
    ReplicationScheme scheme;
    std::vector<Support> per_replication_supports;
    /// Fraction of replications selecting each variable.
    Vector frequencies;
    Support intersected;
    Vector refit_weights;
    /// False when the design restricted to the intersection is rank deficient (weights are then zero).
    bool refit_ok = true;
    /// Replications whose path stopped (degenerate) above mu; they contribute their last valid support.
    int degenerate_replicates = 0;
    /// Residual scheme only: the full-data path that supplies w_hat did not reach mu.
    bool base_degenerate = false;
    int dropped_rows = 0;

    bool two_step = false;
    /// Two-step only: support of the first full-data Lasso at mu * ln p.
    Support restricted;
    /// Two-step only: the first step selected nothing.
    bool empty_restriction = false;
};

/// Replicated supports on a grid of levels. supports[k][r] belongs to mus[k], replication r.
struct GridSelection {
    std::vector<double> mus;
    std::vector<std::vector<Support>> supports;
    std::vector<int> degenerate;
    std::vector<char> base_degenerate;
    std::vector<Support> restricted;
    int dropped_rows = 0;
};

Support intersect_supports(const std::vector<Support>& supports);

/// Supports of every replication at every level in `mus` (each path is computed once
/// per replicate and read off at all levels where the scheme allows it).
GridSelection replicate_supports(const Dataset& data, const std::vector<double>& mus, const ReplicationScheme& scheme,
                                 const SelectionOptions& options = {});

/// Two-step variant: a full-data Lasso at mu * ln p restricts the columns, then the
/// replications run on the restricted design. Supports are reported in original indices.
GridSelection replicate_supports_two_step(const Dataset& data, const std::vector<double>& mus,
                                          const ReplicationScheme& scheme, const SelectionOptions& options = {});

/// Aggregates the replications at mus[k] into a SelectionRun (frequencies, intersection, refit).
SelectionRun summarize(const Dataset& data, const GridSelection& grid, size_t k, const ReplicationScheme& scheme);

SelectionRun run_bolasso(const Dataset& data, double mu, const ReplicationScheme& scheme,
                         const SelectionOptions& options = {});

SelectionRun run_two_step(const Dataset& data, double mu, const ReplicationScheme& scheme,
                          const SelectionOptions& options = {});

}  // namespace bolasso
