#pragma once

#include <cstdint>
#include <random>

namespace cbilab {

/// splitmix64 step; used to derive independent per-path seeds from a base seed.
std::uint64_t splitmix64(std::uint64_t& state);

/// Deterministic stream seed for (base, stream_index); streams are decorrelated
/// so path ensembles can be generated in any order or in parallel.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream);

/// Self-contained random source with pinned sampling algorithms so that a
/// given seed reproduces the same draws regardless of standard-library
/// distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform on the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

    /// Standard normal via the Marsaglia polar method (pairs cached).
    double normal();

    /// Gamma with the given shape and unit scale, Marsaglia-Tsang rejection;
    /// shape < 1 handled through the boost X = X' * U^{1/shape}.
    double gamma(double shape);

    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace cbilab
