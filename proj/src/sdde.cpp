#include "delaycredit/sdde.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "delaycredit/errors.hpp"

namespace delaycredit {

SddeModel::SddeModel(StepCurve alpha_, StepCurve C_, VolatilityModel g_, MemoryPath memory_,
                     double L_, double T_)
    : alpha(std::move(alpha_)), C(std::move(C_)), g(std::move(g_)), memory(std::move(memory_)),
      L(L_), T(T_) {
    if (!(L > 0.0) || !(T > 0.0)) fail(Errc::BadParameters, "SddeModel needs L > 0 and T > 0");
    if (std::abs(memory.delay() - L) > 1e-9 * L)
        fail(Errc::BadParameters, "memory path span does not match L");
}

SchemeConfig::SchemeConfig(double theta_, long m_steps_, double dt_, long m_lag_)
    : theta(theta_), m_steps(m_steps_), dt(dt_), m_lag(m_lag_) {
    if (!(theta >= 0.0 && theta <= 1.0)) fail(Errc::BadParameters, "theta must be in [0, 1]");
    if (m_steps < 1 || !(dt > 0.0)) fail(Errc::BadParameters, "need m_steps >= 1 and dt > 0");
    if (m_lag < 1) fail(Errc::BadParameters, "m_lag must be >= 1");
}

SchemeConfig SchemeConfig::make(double theta, double T, double L, long m_steps) {
    if (!(T > 0.0) || !(L > 0.0)) fail(Errc::BadParameters, "need T > 0 and L > 0");
    if (m_steps < 1) fail(Errc::BadParameters, "need m_steps >= 1");
    double dt = T / static_cast<double>(m_steps);
    long m_lag = std::lround(L / dt);
    if (m_lag < 1 || std::abs(L - static_cast<double>(m_lag) * dt) > 1e-12 * L)
        fail(Errc::DtNotAligned, "L = " + std::to_string(L) + " is not an integer multiple of dt = " +
                                     std::to_string(dt));
    return SchemeConfig(theta, m_steps, dt, m_lag);
}

double Path::at(double t) const {
    if (times.empty()) fail(Errc::BadParameters, "empty path");
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    auto it = std::upper_bound(times.begin(), times.end(), t);
    size_t j = static_cast<size_t>(it - times.begin());
    double w = (t - times[j - 1]) / (times[j] - times[j - 1]);
    return (1.0 - w) * values[j - 1] + w * values[j];
}

double lagged_value(std::span<const double> path_so_far, const MemoryPath& memory, long n,
                    long m_lag, double dt) {
    long idx = n - m_lag;
    if (idx >= 0) {
        if (static_cast<size_t>(idx) >= path_so_far.size())
            fail(Errc::BadParameters, "lagged index " + std::to_string(idx) + " not yet computed");
        return path_so_far[static_cast<size_t>(idx)];
    }
    return memory(static_cast<double>(idx) * dt);
}

double step_theta(double v_n, double v_lag_n, double v_lag_np1, double alpha_n, double alpha_np1,
                  double c_n, double c_np1, double g_eval, double dW, double theta, double dt) {
    double denom = 1.0 - theta * dt * alpha_np1 * v_lag_np1;
    if (std::abs(denom) < 1e-12)
        fail(Errc::SingularImplicitStep,
             "1 - theta*dt*alpha*V_lag = " + std::to_string(denom) + "; dt too large");
    double rhs = v_n + dt * (-theta * c_np1 + (1.0 - theta) * (alpha_n * v_n * v_lag_n - c_n)) +
                 g_eval * v_n * dW;
    return rhs / denom;
}

Path simulate_path(const SddeModel& model, const SchemeConfig& scheme, const NoiseStream& noise) {
    if (std::abs(scheme.dt * static_cast<double>(scheme.m_steps) - model.T) > 1e-9 * model.T)
        fail(Errc::BadParameters, "scheme horizon does not match model.T");
    if (std::abs(scheme.dt * static_cast<double>(scheme.m_lag) - model.L) > 1e-9 * model.L)
        fail(Errc::BadParameters, "scheme lag does not match model.L");

    const long M = scheme.m_steps;
    const double dt = scheme.dt;
    Path path{std::vector<double>(static_cast<size_t>(M) + 1),
              std::vector<double>(static_cast<size_t>(M) + 1),
              noise.seed(),
              noise.stream_id(),
              scheme,
              0.0};
    path.values[0] = model.memory(0.0);
    path.times[0] = 0.0;
    path.min_value = path.values[0];

    for (long n = 0; n < M; ++n) {
        double t_n = static_cast<double>(n) * dt;
        double t_np1 = static_cast<double>(n + 1) * dt;
        std::span<const double> so_far(path.values.data(), static_cast<size_t>(n) + 1);
        double v_lag_n = lagged_value(so_far, model.memory, n, scheme.m_lag, dt);
        double v_lag_np1 = lagged_value(so_far, model.memory, n + 1, scheme.m_lag, dt);
        // g(V_{n-m}): memory lags evaluate through the fitted interpolant,
        // simulated lags (T > L) require a value-capable kind.
        double sigma = (n < scheme.m_lag)
                           ? lagged_sigma(model.g, model.memory,
                                          static_cast<double>(n - scheme.m_lag) * dt)
                           : model.g.at_value(v_lag_n);
        double dW = noise.increment(static_cast<std::uint64_t>(n), dt);
        double v_next;
        try {
            v_next = step_theta(path.values[static_cast<size_t>(n)], v_lag_n, v_lag_np1,
                                model.alpha(t_n), model.alpha(t_np1), model.C(t_n), model.C(t_np1),
                                sigma, dW, scheme.theta, dt);
        } catch (const Error& e) {
            if (e.code() == Errc::SingularImplicitStep)
                fail(Errc::SingularImplicitStep, "step " + std::to_string(n) + ": " + e.what());
            throw;
        }
        if (!std::isfinite(v_next))
            fail(Errc::NonFiniteValue, "non-finite value at step " + std::to_string(n + 1));
        path.values[static_cast<size_t>(n) + 1] = v_next;
        path.times[static_cast<size_t>(n) + 1] = t_np1;
        path.min_value = std::min(path.min_value, v_next);
    }
    return path;
}

Path simulate_merton_path(double v0, const StepCurve& alpha, const StepCurve& C, double sigma,
                          const SchemeConfig& scheme, const NoiseStream& noise) {
    if (!(sigma > 0.0)) fail(Errc::BadParameters, "sigma must be positive");
    const long M = scheme.m_steps;
    const double dt = scheme.dt;
    const double theta = scheme.theta;
    Path path{std::vector<double>(static_cast<size_t>(M) + 1),
              std::vector<double>(static_cast<size_t>(M) + 1),
              noise.seed(),
              noise.stream_id(),
              scheme,
              v0};
    path.values[0] = v0;
    path.times[0] = 0.0;
    for (long n = 0; n < M; ++n) {
        double t_n = static_cast<double>(n) * dt;
        double t_np1 = static_cast<double>(n + 1) * dt;
        double a_np1 = alpha(t_np1);
        double denom = 1.0 - theta * dt * a_np1;
        if (std::abs(denom) < 1e-12)
            fail(Errc::SingularImplicitStep, "step " + std::to_string(n) + ": dt too large");
        double v_n = path.values[static_cast<size_t>(n)];
        double dW = noise.increment(static_cast<std::uint64_t>(n), dt);
        double rhs = v_n + dt * (-theta * C(t_np1) + (1.0 - theta) * (alpha(t_n) * v_n - C(t_n))) +
                     sigma * v_n * dW;
        double v_next = rhs / denom;
        if (!std::isfinite(v_next))
            fail(Errc::NonFiniteValue, "non-finite value at step " + std::to_string(n + 1));
        path.values[static_cast<size_t>(n) + 1] = v_next;
        path.times[static_cast<size_t>(n) + 1] = t_np1;
        path.min_value = std::min(path.min_value, v_next);
    }
    return path;
}

double merton_exact_mean(double v0, double alpha, double T) { return v0 * std::exp(alpha * T); }

}  // namespace delaycredit
