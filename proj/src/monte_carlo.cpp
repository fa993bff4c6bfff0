#include "delaycredit/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "delaycredit/errors.hpp"
#include "delaycredit/parallel.hpp"
#include "delaycredit/rng.hpp"

namespace delaycredit {

namespace {

template <typename Simulate>
Ensemble run_generic(std::size_t n_paths, std::uint64_t seed, long m_steps, double dt,
                     const Simulate& simulate) {
    if (n_paths < 1) fail(Errc::BadParameters, "need n_paths >= 1");
    Ensemble ens;
    ens.seed = seed;
    ens.times.resize(static_cast<std::size_t>(m_steps) + 1);
    for (long n = 0; n <= m_steps; ++n)
        ens.times[static_cast<std::size_t>(n)] = static_cast<double>(n) * dt;
    ens.paths.assign(n_paths, {});
    std::vector<char> bad(n_paths, 0);

    parallel_for(n_paths, [&](std::size_t i) {
        try {
            Path p = simulate(NoiseStream(seed, i));
            bad[i] = p.nonpositive() ? 1 : 0;
            ens.paths[i] = std::move(p.values);
        } catch (const Error& e) {
            if (e.code() != Errc::NonFiniteValue && e.code() != Errc::SingularImplicitStep) throw;
            bad[i] = 1;
            ens.paths[i].assign(static_cast<std::size_t>(m_steps) + 1,
                                std::numeric_limits<double>::quiet_NaN());
        }
    });

    for (std::size_t i = 0; i < n_paths; ++i)
        if (bad[i]) ens.excluded.push_back(i);
    if (ens.excluded.size() == n_paths)
        fail(Errc::AllPathsExcluded, "every path was non-positive or non-finite");
    return ens;
}

}  // namespace

bool Ensemble::is_excluded(std::size_t i) const {
    return std::binary_search(excluded.begin(), excluded.end(), i);
}

Ensemble run_ensemble(const SddeModel& model, const SchemeConfig& scheme, std::size_t n_paths,
                      std::uint64_t seed) {
    return run_generic(n_paths, seed, scheme.m_steps, scheme.dt,
                       [&](const NoiseStream& ns) { return simulate_path(model, scheme, ns); });
}

Ensemble run_merton_ensemble(double v0, const StepCurve& alpha, const StepCurve& C, double sigma,
                             const SchemeConfig& scheme, std::size_t n_paths, std::uint64_t seed) {
    return run_generic(n_paths, seed, scheme.m_steps, scheme.dt, [&](const NoiseStream& ns) {
        return simulate_merton_path(v0, alpha, C, sigma, scheme, ns);
    });
}

std::vector<double> mean_path(const Ensemble& ensemble) {
    std::size_t n = ensemble.n_included();
    if (n == 0) fail(Errc::AllPathsExcluded, "no included paths");
    std::vector<double> mean(ensemble.times.size(), 0.0);
    for (std::size_t i = 0; i < ensemble.n_paths(); ++i) {
        if (ensemble.is_excluded(i)) continue;
        const auto& p = ensemble.paths[i];
        for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += p[k];
    }
    for (double& m : mean) m /= static_cast<double>(n);
    return mean;
}

std::vector<double> stddev_path(const Ensemble& ensemble) {
    std::size_t n = ensemble.n_included();
    if (n == 0) fail(Errc::AllPathsExcluded, "no included paths");
    std::vector<double> mean = mean_path(ensemble);
    std::vector<double> var(ensemble.times.size(), 0.0);
    if (n == 1) return var;
    for (std::size_t i = 0; i < ensemble.n_paths(); ++i) {
        if (ensemble.is_excluded(i)) continue;
        const auto& p = ensemble.paths[i];
        for (std::size_t k = 0; k < var.size(); ++k) {
            double d = p[k] - mean[k];
            var[k] += d * d;
        }
    }
    for (double& v : var) v = std::sqrt(v / static_cast<double>(n - 1));
    return var;
}

std::pair<std::vector<double>, std::vector<double>> confidence_band(const Ensemble& ensemble,
                                                                    double level) {
    if (!(level > 0.0 && level < 1.0)) fail(Errc::BadParameters, "level must be in (0, 1)");
    std::vector<double> mean = mean_path(ensemble);
    std::vector<double> sd = stddev_path(ensemble);
    double z = inverse_normal_cdf(0.5 + level / 2.0);
    double scale = z / std::sqrt(static_cast<double>(ensemble.n_included()));
    std::vector<double> lower(mean), upper(mean);
    for (std::size_t k = 0; k < mean.size(); ++k) {
        lower[k] -= scale * sd[k];
        upper[k] += scale * sd[k];
    }
    return {std::move(lower), std::move(upper)};
}

}  // namespace delaycredit
