#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "delaycredit/expint.hpp"
#include "delaycredit/market_data.hpp"
#include "delaycredit/pde.hpp"
#include "delaycredit/sdde.hpp"

namespace delaycredit {

/// Claim value f(v_i, tau_k) on the grid x tau lattice, marching from the
/// smoothed terminal payoff at tau = 0. Boundary columns carry the exact
/// Dirichlet data.
struct PricingSurface {
    Grid grid;
    std::vector<double> taus;
    std::vector<std::vector<double>> values;  // (K+1) x N cell values
    std::vector<double> lower_bc, upper_bc;   // per tau row
    ClaimKind claim = ClaimKind::equity;
    double B = 0.0;
    bool stochastic = false;
    std::size_t n_samples = 1;
    std::uint64_t seed = 0;

    std::size_t n_rows() const { return values.size(); }
    /// Linear interpolation in v within the tau row nearest to tau.
    double value_at(double v, double tau) const;
    long nearest_row(double tau) const;
    bool same_lattice(const PricingSurface& other) const;
};

/// Rate/payout curves in model time (0 = valuation origin).
struct MarketCurves {
    StepCurve r, C, C_y;

    static MarketCurves constant(double r, double C = 0.0, double C_y = 0.0);
};

struct PricingConfig {
    double dtau = 1.0 / 365.0;
    double epsilon = -1.0;  ///< payoff smoothing width; <= 0 means one cell (h)
    UpwindRule upwind = UpwindRule::paper;
    ExpIntConfig expint{};
};

/// sigma_eff(tau) = g evaluated at the memory value phi(T - tau - L); only
/// valid when the lag never leaves the memory window (T <= L).
double effective_sigma_deterministic(const VolatilityModel& g, const MemoryPath& memory, double T,
                                     double L, double tau);

/// Deterministic RPDE solve for T <= L, marching tau in [0, T].
PricingSurface solve_surface_deterministic(const ClaimSpec& claim, const Grid& grid,
                                           const VolatilityModel& g, const MemoryPath& memory,
                                           const MarketCurves& curves, double T, double L,
                                           const PricingConfig& cfg);

/// Merton PDE with constant volatility, marching tau in [0, T].
PricingSurface solve_merton_surface(const ClaimSpec& claim, const Grid& grid, double sigma,
                                    const MarketCurves& curves, double T,
                                    const PricingConfig& cfg);

/// General single-coefficient-path solve: sigma_eff as a function of tau on
/// [0, t_span]. Shared by the deterministic, Merton, and per-sample solves.
PricingSurface march_surface(const ClaimSpec& claim, const Grid& grid,
                             const std::function<double(double)>& sigma_eff,
                             const MarketCurves& curves, double T, double t_span,
                             const PricingConfig& cfg);

struct StochasticSurfaceResult {
    PricingSurface mean;
    std::vector<std::vector<double>> stddev;  // same lattice as mean.values
    std::size_t n_excluded = 0;
};

/// T > L nested procedure: per sample, simulate a firm path, freeze the
/// diffusion coefficient along it, solve the now-deterministic PDE on
/// tau in [0, L], and average over samples in index order.
StochasticSurfaceResult solve_surface_stochastic(const ClaimSpec& claim, const Grid& grid,
                                                 const SddeModel& model,
                                                 const SchemeConfig& scheme,
                                                 const MarketCurves& curves,
                                                 std::size_t n_samples, std::uint64_t seed,
                                                 const PricingConfig& cfg);

/// Lognormal call with strike B (verification oracle).
double black_scholes_call(double v, double B, double r, double sigma, double tau_remaining);

/// Debt surface derived from the identity F = v - f.
PricingSurface debt_from_identity(const PricingSurface& equity);

/// max over the lattice of |F + f - v| for matching equity/debt surfaces.
double debt_equity_identity_check(const PricingSurface& equity, const PricingSurface& debt);

}  // namespace delaycredit
