#include "shiftlab/random.hpp"

#include <cmath>
#include <numbers>

namespace shiftlab {

std::uint64_t splitmix64(std::uint64_t &state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

RandomSeed derive_seed(RandomSeed master, std::uint64_t stream) {
    // hash the master first so nearby masters do not share replicate streams
    std::uint64_t m = master.value;
    std::uint64_t state = splitmix64(m) + stream;
    return RandomSeed{splitmix64(state)};
}

Rng make_rng(RandomSeed seed) {
    std::uint64_t state = seed.value;
    std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(state)),
                      static_cast<std::uint32_t>(splitmix64(state)),
                      static_cast<std::uint32_t>(splitmix64(state)),
                      static_cast<std::uint32_t>(splitmix64(state))};
    return Rng(seq);
}

double uniform01(Rng &rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double standard_normal(Rng &rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) {
        u1 = uniform01(rng);
    }
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace shiftlab
