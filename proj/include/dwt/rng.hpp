#pragma once

#include <cstdint>

namespace dwt {

/// Counter-based generator: draw i of stream s depends only on (seed, s, i),
/// so results do not depend on the order in which workers consume draws.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::uint64_t bits(std::uint64_t counter) const {
        std::uint64_t z = mix(seed_ ^ mix(stream_ + 0x9e3779b97f4a7c15ULL));
        return mix(z ^ (counter * 0xd1b54a32d192ed03ULL + 0x632be59bd9b4e019ULL));
    }
    /// Uniform in [0, 1) with 53 random bits.
    double uniform(std::uint64_t counter) const { return (bits(counter) >> 11) * 0x1.0p-53; }
    /// Uniform in [-1, 1).
    double symmetric(std::uint64_t counter) const { return 2.0 * uniform(counter) - 1.0; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_, stream_;
};

}  // namespace dwt
