#pragma once

#include "bolasso/conditions.hpp"
#include "bolasso/selection.hpp"
#include "bolasso/synthetic.hpp"
#include "bolasso/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bolasso {

/// Log-spaced levels from max down to min.
struct MuGrid {
    double min = 1e-3;
    double max = 1.0;
    int count = 64;

    std::vector<double> values() const;
};

/// kind is "lasso" (single Lasso per dataset) or a replication scheme name.
struct SchemeSpec {
    std::string kind = "pairs";
    bool two_step = false;

    std::string label() const;
};

enum class DesignMode : uint8_t { fixed, fresh };

/// Redraw the fixed design until the sample moments satisfy (A5)-(A6) with theta >= theta_min.
struct DesignRequirement {
    bool a5_a6 = false;
    double theta_min = 0.0;
    int max_tries = 1000;
};

struct PhaseGrid {
    std::vector<int> n_values;
    std::vector<int> j_values;
    int draws = 1000;
};

struct ExperimentConfig {
    GeneratorSpec generator;
    MuGrid mu_grid;
    std::vector<SchemeSpec> schemes;
    int outer_trials = 1;
    std::vector<int> m_values{128};
    DesignMode design = DesignMode::fixed;
    DesignRequirement requirement;
    PhaseGrid phase;
    std::string output_dir = ".";
    uint64_t seed = 0;
    int workers = 1;

    void validate() const;
};

/// Parses the JSON config format; unknown keys are rejected.
ExperimentConfig config_from_json(const std::string& text);
/// Canonical JSON of everything that affects results (workers and output_dir excluded).
std::string config_to_json(const ExperimentConfig& config);
uint64_t config_hash(const ExperimentConfig& config);

GeneratorSpec generator_from_json(const std::string& text);
std::string generator_to_json(const GeneratorSpec& spec);

/// Run manifest: seed, scheme, mu, m, frequencies, intersection (1-based), degenerate count.
std::string selection_manifest(const SelectionRun& run);
/// Diagnostics report with 1-based index sets.
std::string report_to_json(const DiagnosticsReport& report);

/// The datasets an experiment runs on: one design (or one per trial) and fresh noise per trial.
struct TrialSource {
    SyntheticProblem base;
    int design_tries = 1;

    Dataset trial(const ExperimentConfig& config, int t) const;
};
TrialSource prepare_trials(const ExperimentConfig& config);

struct ProbabilityMatrix {
    std::string scheme;
    /// "before" (replication frequency) or "after" (membership in the intersection).
    std::string mode;
    int m = 0;
    int trials = 0;
    std::vector<double> mus;
    /// p x mus.size().
    Matrix values;
    long degenerate_replicates = 0;
};

struct PatternCurves {
    std::string scheme;
    std::vector<double> mus;
    std::vector<int> m_values;
    /// m_values.size() x mus.size(): P(J_hat = J) (sign pattern for the plain Lasso).
    Matrix exact;
    /// P(J subset of J_hat).
    Matrix superset;
    int trials = 0;
};

struct PhaseResult {
    std::vector<int> n_values;
    std::vector<int> j_values;
    /// n_values.size() x j_values.size().
    Matrix p_consistency;
    Matrix p_a6;
    /// Mean of log theta over draws where (A5) and (A6) hold; NaN when there are none.
    Matrix mean_log_theta;
    Matrix qualifying;
    int draws = 0;
};

struct SelectionSweep {
    std::vector<ProbabilityMatrix> before;
    std::vector<ProbabilityMatrix> after;
};

/// Each sweep checks the output directory before computing when write_files is true.
SelectionSweep sweep_selection_probability(const ExperimentConfig& config, bool write_files = true);
std::vector<PatternCurves> sweep_pattern_probability(const ExperimentConfig& config, bool write_files = true);
PhaseResult sweep_condition_phase(const ExperimentConfig& config, bool write_files = true);

}  // namespace bolasso
