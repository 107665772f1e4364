#pragma once

#include <cstdint>
#include <initializer_list>

namespace bolasso {

/// xoshiro256** with splitmix64 seeding.
///
/// Substreams are derived by hashing (seed, key...) so replication i of a run
/// always sees the same draws regardless of scheduling. Distributions are
/// implemented here rather than taken from <random> so outputs do not depend
/// on the standard library vendor.
class Rng {
public:
    explicit Rng(uint64_t seed);

    /// Independent stream identified by (seed, keys...).
    static Rng substream(uint64_t seed, std::initializer_list<uint64_t> keys);
    static uint64_t derive(uint64_t seed, std::initializer_list<uint64_t> keys);

    uint64_t next_u64();
    /// Uniform on [0, 1).
    double uniform();
    /// Uniform on {0, ..., bound-1}; bound must be positive.
    uint64_t uniform_index(uint64_t bound);
    /// Standard normal (Marsaglia polar method).
    double normal();

private:
    uint64_t s_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

uint64_t splitmix64(uint64_t& state);

}  // namespace bolasso
