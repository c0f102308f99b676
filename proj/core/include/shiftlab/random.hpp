#pragma once

#include <cstdint>
#include <random>

namespace shiftlab {

/// Explicit seed carried by every stochastic operation.
struct RandomSeed {
    std::uint64_t value = 0;

    friend bool operator==(RandomSeed, RandomSeed) = default;
};

using Rng = std::mt19937_64;

/// One step of the splitmix64 generator; advances `state`.
std::uint64_t splitmix64(std::uint64_t &state);

/// Child seed for an independent stream: splitmix64 applied to master + stream.
/// Replicate r of an experiment uses derive_seed(master, r).
RandomSeed derive_seed(RandomSeed master, std::uint64_t stream);

Rng make_rng(RandomSeed seed);

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
double uniform01(Rng &rng);

/// Standard normal via Box-Muller (no cached state, so draws are reproducible
/// regardless of how a distribution object would be reused).
double standard_normal(Rng &rng);

}  // namespace shiftlab
