#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "delaycredit/market_data.hpp"
#include "delaycredit/rng.hpp"
#include "delaycredit/step_curve.hpp"

namespace delaycredit {

/// Firm-value dynamics: dV = (alpha(t) V(t) V(t-L) - C(t)) dt + g(V(t-L)) V(t) dW,
/// with V = memory on [-L, 0]. Curves are functions of model time (0 = origin).
struct SddeModel {
    StepCurve alpha;
    StepCurve C;
    VolatilityModel g;
    MemoryPath memory;
    double L;  ///< delay, years
    double T;  ///< horizon, years

    SddeModel(StepCurve alpha_, StepCurve C_, VolatilityModel g_, MemoryPath memory_, double L_,
              double T_);
};

/// Time discretization of the theta scheme: dt = T / m_steps, L = m_lag * dt.
struct SchemeConfig {
    double theta;
    long m_steps;
    double dt;
    long m_lag;

    SchemeConfig(double theta_, long m_steps_, double dt_, long m_lag_);

    /// Derive dt and m_lag from the horizon and delay: dt = T / m_steps.
    static SchemeConfig make(double theta, double T, double L, long m_steps);
};

/// One simulated trajectory on the uniform lattice t_n = n * dt.
struct Path {
    std::vector<double> times;
    std::vector<double> values;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    SchemeConfig scheme;
    double min_value = 0.0;  ///< min over the path; <= 0 flags exclusion from PDE coefficients

    bool nonpositive() const { return !(min_value > 0.0); }
    /// Linear interpolation of the path at model time t in [0, T].
    double at(double t) const;
};

/// V_{n - m_lag}: reads the memory path for negative lattice times and the
/// already-computed path values otherwise.
double lagged_value(std::span<const double> path_so_far, const MemoryPath& memory, long n,
                    long m_lag, double dt);

/// One theta-semi-implicit Euler-Maruyama update; the implicit drift term is
/// linear in V_{n+1} because V_{n-m+1} is already known (m_lag >= 1).
double step_theta(double v_n, double v_lag_n, double v_lag_np1, double alpha_n, double alpha_np1,
                  double c_n, double c_np1, double g_eval, double dW, double theta, double dt);

Path simulate_path(const SddeModel& model, const SchemeConfig& scheme, const NoiseStream& noise);

/// Merton dynamics dV = (alpha(t) V - C(t)) dt + sigma V dW under the same
/// theta scheme (curves in model time).
Path simulate_merton_path(double v0, const StepCurve& alpha, const StepCurve& C, double sigma,
                          const SchemeConfig& scheme, const NoiseStream& noise);

/// E[V(T)] = v0 * exp(alpha T) for the Merton model with C = 0.
double merton_exact_mean(double v0, double alpha, double T);

}  // namespace delaycredit
