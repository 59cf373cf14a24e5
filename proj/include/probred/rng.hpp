// rng.hpp
//
// Splittable pseudo-random streams for the Monte Carlo engine.
//
// Every simulation replication draws from its own stream, derived purely
// from (seed, replication index). Streams never share state, so a study
// partitioned across any number of threads produces bit-identical results
// to a serial run. The generator is SplitMix64 (Steele, Lea & Flood 2014),
// whose 64-bit avalanche mix gives independent-looking streams from
// consecutive indices.
//
// Normal variates come from the inverse-CDF transform through
// std_normal_quantile, so the simulator and the test battery share one
// audited normal code path.

#ifndef PROBRED_RNG_HPP
#define PROBRED_RNG_HPP

#include <cstdint>

#include "probred/common.hpp"
#include "probred/special_fns.hpp"

namespace probred {

namespace detail {

// Finalizer from SplitMix64: a bijective 64-bit mix with full avalanche.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

// One independent pseudo-random stream. Cheap to construct; replication i
// of a study seeds its stream as RandomStream(seed, i).
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream_index)
        : state_(detail::mix64(seed + 0x9e3779b97f4a7c15ULL *
                                          detail::mix64(stream_index + 1))) {}

    std::uint64_t next_bits() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return detail::mix64(state_);
    }

    // Uniform on the open interval (0, 1): 53 random bits shifted into
    // (0,1) with a half-ulp offset, so the normal quantile below never
    // sees 0 or 1.
    double uniform() {
        return (static_cast<double>(next_bits() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() { return std_normal_quantile(uniform()); }

    // Gamma(shape, 1) via Marsaglia & Tsang's squeeze method; shapes below
    // one use the standard boost from shape + 1. Rejection consumes a
    // variable number of draws, which is harmless because the stream is
    // private to one replication.
    double gamma(double shape) {
        detail::require(shape > 0.0, "gamma shape must be positive");
        if (shape < 1.0) {
            const double u = uniform();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            const double u = uniform();
            if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
        }
    }

private:
    std::uint64_t state_;
};

}  // namespace probred

#endif  // PROBRED_RNG_HPP
