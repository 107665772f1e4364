#pragma once

#include "bolasso/conditions.hpp"
#include "bolasso/rng.hpp"
#include "bolasso/types.hpp"

#include <cstdint>
#include <string>

namespace bolasso {

enum class CovarianceKind : uint8_t { identity, random, user };
enum class WantCondition : uint8_t { any, satisfied, violated };

const char* to_string(CovarianceKind kind);
const char* to_string(WantCondition want);
CovarianceKind parse_covariance_kind(const std::string& name);
WantCondition parse_want_condition(const std::string& name);

struct GeneratorSpec {
    int n = 1024;
    int p = 16;
    int j_count = 8;
    CovarianceKind covariance = CovarianceKind::random;
    /// Used when covariance == user.
    Matrix user_covariance;
    /// Eigenvalues of a random covariance are log-uniform on [1/spectrum_ratio, 1] before
    /// rescaling to unit diagonal.
    double spectrum_ratio = 10.0;
    double w_min = 1.0;
    double w_max = 1.0;
    double noise_sigma = 1.0;
    WantCondition want_condition = WantCondition::any;
    /// Required distance of the condition value from 1 (violated: > 1 + margin, satisfied: < 1 - margin).
    double condition_margin = 0.0;
    int max_retries = 10000;
    uint64_t seed = 0;

    void validate() const;
};

struct SyntheticProblem {
    Dataset data;
    GroundTruth truth;
    /// Population moments: Q = Sigma, c = Sigma w_true.
    MomentForm population;
    Matrix covariance;
    /// Population consistency-condition value.
    double cond_value = 0.0;
    /// Covariances rejected before acceptance.
    int retries = 0;
};

/// Loadings with j_count nonzeros at indices 0..j_count-1, magnitudes uniform in
/// [w_min, w_max], random signs.
Vector sample_loadings(const GeneratorSpec& spec, Rng& rng);

/// Covariance for the spec (rejection-sampled when want_condition != any).
/// Throws InputError after max_retries rejections.
Matrix sample_covariance(const GeneratorSpec& spec, const GroundTruth& truth, Rng& rng, int* retries = nullptr,
                         double* cond_value = nullptr);

/// Uniformly distributed orthogonal matrix.
Matrix random_orthogonal(int p, Rng& rng);

/// n i.i.d. rows from N(0, covariance).
Matrix sample_design(const Matrix& covariance, int n, Rng& rng);

/// y = X w + sigma * N(0, 1) noise.
Vector sample_response(const Matrix& X, const Vector& w, double sigma, Rng& rng);

/// Full draw from the spec's seed: loadings, covariance, design and noise come from separate substreams.
SyntheticProblem generate(const GeneratorSpec& spec);

}  // namespace bolasso
