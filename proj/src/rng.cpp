#include "delaycredit/rng.hpp"

#include <cmath>

#include "delaycredit/errors.hpp"

namespace delaycredit {

namespace {

// SplitMix64 finalizer; full-avalanche 64-bit mix.
std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Coefficients of Acklam's rational approximation to Phi^{-1}.
const double kA[6] = {-3.969683028665376e+01, 2.209460984245205e+02,  -2.759285104469687e+02,
                      1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
const double kB[5] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                      6.680131188771972e+01, -1.328068155288572e+01};
const double kC[6] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                      -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
const double kD[4] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                      3.754408661907416e+00};

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) fail(Errc::BadParameters, "inverse_normal_cdf needs p in (0,1)");
    const double p_low = 0.02425;
    double x;
    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q + kC[5]) /
            ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        double q = p - 0.5;
        double t = q * q;
        x = (((((kA[0] * t + kA[1]) * t + kA[2]) * t + kA[3]) * t + kA[4]) * t + kA[5]) * q /
            (((((kB[0] * t + kB[1]) * t + kB[2]) * t + kB[3]) * t + kB[4]) * t + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q + kC[5]) /
            ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1.0);
    }
    // One Halley step against the exact CDF brings the error near machine eps.
    double e = normal_cdf(x) - p;
    double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
    return x;
}

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
    key_ = mix64(seed + kGolden * (stream_id + 1));
}

double NoiseStream::uniform(std::uint64_t n) const {
    std::uint64_t bits = mix64(key_ ^ (kGolden * (n + 1)));
    // 53 random bits into (0,1), never exactly 0 or 1
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double NoiseStream::normal(std::uint64_t n) const { return inverse_normal_cdf(uniform(n)); }

double NoiseStream::increment(std::uint64_t n, double dt) const {
    return std::sqrt(dt) * normal(n);
}

}  // namespace delaycredit
