#pragma once

#include <cstdint>
#include <vector>

// Self-contained deterministic random number generation. Standard-library
// distributions are not reproducible across implementations, so the samplers
// here are written out explicitly: fixed seed means fixed output everywhere.

namespace biphoton {

/// Mix a base seed with a stream index (frame number, worker id, ...) into an
/// independent stream seed.
std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index);

/// splitmix64 counter generator with explicit Poisson/Gaussian/discrete draws.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();
    /// Uniform double in [0, 1).
    double uniform();
    /// Standard normal via Box-Muller (one spare cached).
    double gaussian();
    /// Poisson draw; exact inversion for small means, split recursively above.
    long poisson(double mean);
    /// Sample an index from a cumulative distribution (cdf.back() == total mass).
    std::size_t sample_cdf(const std::vector<double>& cdf);

  private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Inclusive prefix sums of nonnegative weights, for sample_cdf.
std::vector<double> cumulative_from_weights(const double* weights, std::size_t count);

}  // namespace biphoton
