#pragma once

#include <cstdint>

namespace delaycredit {

/// Inverse of the standard normal CDF, accurate to ~1e-15 (rational
/// approximation refined with one Halley step on erfc).
double inverse_normal_cdf(double p);

/// Standard normal CDF.
double normal_cdf(double x);

/// Counter-based Gaussian stream: the n-th variate is a pure function of
/// (seed, stream_id, n), so draws are reproducible independently of
/// evaluation order or thread scheduling. Distinct stream_ids decorrelate
/// whole streams for parallel Monte Carlo.
class NoiseStream {
public:
    NoiseStream(std::uint64_t seed, std::uint64_t stream_id);

    /// n-th standard normal variate of this stream.
    double normal(std::uint64_t n) const;

    /// Brownian increment over a step of length dt: sqrt(dt) * normal(n).
    double increment(std::uint64_t n, double dt) const;

    /// n-th uniform variate in (0, 1).
    double uniform(std::uint64_t n) const;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t key_;
};

}  // namespace delaycredit
