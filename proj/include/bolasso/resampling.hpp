#pragma once

#include "bolasso/rng.hpp"
#include "bolasso/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace bolasso {

enum class SchemeKind : uint8_t { pairs, residuals, split, oracle_noise };

const char* to_string(SchemeKind kind);
/// Accepts "pairs", "residuals", "split", "oracle_noise" (throws InputError otherwise).
SchemeKind parse_scheme_kind(const std::string& name);

struct ReplicationScheme {
    SchemeKind kind = SchemeKind::pairs;
    int replications = 1;
    uint64_t seed = 0;

    void validate() const;
};

/// Stream used by replication `index` of a scheme seeded with `seed`.
inline Rng replication_stream(uint64_t seed, uint64_t index) { return Rng::substream(seed, {0x7265706cULL, index}); }

struct ResidualSet {
    Vector raw;
    Vector centered;
    double mean = 0.0;
};

/// Rows drawn uniformly with replacement; same number of rows as the original.
Dataset bootstrap_pairs(const Dataset& data, Rng& rng);
/// The row indices a pairs replicate would use.
std::vector<int> bootstrap_indices(int n, Rng& rng);

ResidualSet compute_residuals(const Dataset& data, const Vector& w_hat);

/// X unchanged; y*_i = w_hat'x_i + centered residual at a uniformly drawn index.
Dataset bootstrap_residuals(const Dataset& data, const Vector& w_hat, Rng& rng);

struct SplitResult {
    std::vector<Dataset> pieces;
    /// Original row indices making up each piece.
    std::vector<std::vector<int>> rows;
    int dropped = 0;
};

/// Shuffles the rows and cuts them into m contiguous pieces of floor(n/m) rows.
SplitResult split_pieces(const Dataset& data, int m, Rng& rng);

/// Draws one zero-mean noise value.
using NoiseSampler = std::function<double(Rng&)>;
NoiseSampler gaussian_noise(double sigma);

/// y = X w_true + fresh noise.
Dataset oracle_noise_replicate(const Matrix& design, const Vector& w_true, const NoiseSampler& noise, Rng& rng);

}  // namespace bolasso
