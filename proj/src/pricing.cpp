#include "delaycredit/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "delaycredit/errors.hpp"
#include "delaycredit/parallel.hpp"
#include "delaycredit/rng.hpp"

namespace delaycredit {

namespace {

constexpr double kTol = 1e-9;

void check_year_alignment(const StepCurve& curve, double T, double t_span, double dtau) {
    for (double knot : curve.knots()) {
        double tau = T - knot;
        if (tau <= kTol || tau >= t_span - kTol) continue;
        double steps = tau / dtau;
        if (std::abs(steps - std::round(steps)) > 1e-6)
            fail(Errc::DtNotAligned, "dtau = " + std::to_string(dtau) +
                                         " straddles a coefficient boundary at tau = " +
                                         std::to_string(tau));
    }
}

}  // namespace

long PricingSurface::nearest_row(double tau) const {
    if (taus.empty()) fail(Errc::BadParameters, "empty surface");
    auto it = std::lower_bound(taus.begin(), taus.end(), tau);
    if (it == taus.end()) return static_cast<long>(taus.size()) - 1;
    long idx = static_cast<long>(it - taus.begin());
    if (idx > 0 && tau - taus[static_cast<std::size_t>(idx - 1)] <
                       taus[static_cast<std::size_t>(idx)] - tau)
        --idx;
    return idx;
}

double PricingSurface::value_at(double v, double tau) const {
    const auto& row = values[static_cast<std::size_t>(nearest_row(tau))];
    const auto& centers = grid.centers;
    if (v <= centers.front()) return row.front();
    if (v >= centers.back()) return row.back();
    auto it = std::upper_bound(centers.begin(), centers.end(), v);
    std::size_t j = static_cast<std::size_t>(it - centers.begin());
    double w = (v - centers[j - 1]) / (centers[j] - centers[j - 1]);
    return (1.0 - w) * row[j - 1] + w * row[j];
}

bool PricingSurface::same_lattice(const PricingSurface& other) const {
    if (!grid.same_lattice(other.grid) || taus.size() != other.taus.size()) return false;
    for (std::size_t k = 0; k < taus.size(); ++k)
        if (std::abs(taus[k] - other.taus[k]) > kTol) return false;
    return true;
}

MarketCurves MarketCurves::constant(double r, double C, double C_y) {
    return MarketCurves{StepCurve::constant(r), StepCurve::constant(C), StepCurve::constant(C_y)};
}

double effective_sigma_deterministic(const VolatilityModel& g, const MemoryPath& memory, double T,
                                     double L, double tau) {
    double s = T - tau - L;
    if (s > kTol)
        fail(Errc::BadParameters, "deterministic sigma needs T - tau - L <= 0 (T <= L)");
    if (s < -L - kTol * std::max(1.0, L))
        fail(Errc::LagOutOfMemory, "lag " + std::to_string(s) + " before memory start");
    s = std::min(s, 0.0);
    s = std::max(s, -L);
    return lagged_sigma(g, memory, s);
}

PricingSurface march_surface(const ClaimSpec& claim, const Grid& grid,
                             const std::function<double(double)>& sigma_eff,
                             const MarketCurves& curves, double T, double t_span,
                             const PricingConfig& cfg) {
    if (!(t_span > 0.0)) fail(Errc::BadParameters, "marching window must be positive");
    if (!(cfg.dtau > 0.0)) fail(Errc::BadParameters, "dtau must be positive");
    long K = std::lround(t_span / cfg.dtau);
    if (K < 1 || std::abs(static_cast<double>(K) * cfg.dtau - t_span) > kTol * std::max(1.0, t_span))
        fail(Errc::DtNotAligned, "dtau does not divide the marching window");
    check_year_alignment(curves.r, T, t_span, cfg.dtau);
    check_year_alignment(curves.C, T, t_span, cfg.dtau);
    check_year_alignment(curves.C_y, T, t_span, cfg.dtau);

    double eps = cfg.epsilon > 0.0 ? cfg.epsilon : grid.h;
    PayoffSmoother smoother(eps);

    PricingSurface surf;
    surf.grid = grid;
    surf.claim = claim.kind;
    surf.B = claim.B;
    surf.taus.resize(static_cast<std::size_t>(K) + 1);
    surf.values.assign(static_cast<std::size_t>(K) + 1, {});
    surf.lower_bc.assign(static_cast<std::size_t>(K) + 1, 0.0);
    surf.upper_bc.assign(static_cast<std::size_t>(K) + 1, 0.0);

    auto discount = [&](double tau) { return std::exp(-curves.r.integrate(T - tau, T)); };
    auto assemble_at = [&](double tau) {
        return assemble(grid, claim, sigma_eff(tau), curves.r(T - tau), curves.C(T - tau),
                        curves.C_y(T - tau), discount(tau), cfg.upwind);
    };

    std::vector<double> f(static_cast<std::size_t>(grid.n));
    for (long i = 1; i <= grid.n; ++i)
        f[static_cast<std::size_t>(i - 1)] = claim.terminal(grid.center(i), smoother);

    surf.taus[0] = 0.0;
    surf.values[0] = f;
    surf.lower_bc[0] = claim.lower_bc();
    surf.upper_bc[0] = claim.upper_bc(grid.v_max, discount(0.0));

    auto bands_equal = [](const TridiagonalMatrix& a, const TridiagonalMatrix& b) {
        return a.sub == b.sub && a.diag == b.diag && a.super == b.super;
    };

    DiscreteOperator cur = assemble_at(0.0);
    std::optional<PhiApplier> applier;
    TridiagonalMatrix built_on;
    for (long nstep = 0; nstep < K; ++nstep) {
        double tau_next = static_cast<double>(nstep + 1) * cfg.dtau;
        DiscreteOperator next = assemble_at(tau_next);
        try {
            // rebuilding is skipped while the frozen operator is unchanged
            // (constant-coefficient runs build the dense phis exactly once)
            if (!applier || !bands_equal(cur.A, built_on)) {
                applier.emplace(cur.A, cfg.dtau, cfg.expint);
                built_on = cur.A;
            }
            if (cfg.expint.p == 1)
                f = etd1_step(*applier, f, cur.source);
            else
                f = etd2_step(*applier, f, cur.source, next.source);
        } catch (const Error& e) {
            fail(e.code(), "tau step " + std::to_string(nstep) + ": " + e.what());
        }
        for (double x : f)
            if (!std::isfinite(x))
                fail(Errc::NonFiniteValue, "non-finite surface value at tau step " +
                                               std::to_string(nstep + 1));
        std::size_t row = static_cast<std::size_t>(nstep) + 1;
        surf.taus[row] = tau_next;
        surf.values[row] = f;
        surf.lower_bc[row] = claim.lower_bc();
        surf.upper_bc[row] = claim.upper_bc(grid.v_max, discount(tau_next));
        cur = std::move(next);
    }
    return surf;
}

PricingSurface solve_surface_deterministic(const ClaimSpec& claim, const Grid& grid,
                                           const VolatilityModel& g, const MemoryPath& memory,
                                           const MarketCurves& curves, double T, double L,
                                           const PricingConfig& cfg) {
    if (T > L + kTol)
        fail(Errc::BadParameters, "deterministic solve requires T <= L; use the stochastic path");
    double t_span = std::min(T, L);
    auto sigma = [&](double tau) { return effective_sigma_deterministic(g, memory, T, L, tau); };
    return march_surface(claim, grid, sigma, curves, T, t_span, cfg);
}

PricingSurface solve_merton_surface(const ClaimSpec& claim, const Grid& grid, double sigma,
                                    const MarketCurves& curves, double T,
                                    const PricingConfig& cfg) {
    if (!(sigma > 0.0)) fail(Errc::BadParameters, "sigma must be positive");
    auto sig = [sigma](double) { return sigma; };
    return march_surface(claim, grid, sig, curves, T, T, cfg);
}

StochasticSurfaceResult solve_surface_stochastic(const ClaimSpec& claim, const Grid& grid,
                                                 const SddeModel& model,
                                                 const SchemeConfig& scheme,
                                                 const MarketCurves& curves,
                                                 std::size_t n_samples, std::uint64_t seed,
                                                 const PricingConfig& cfg) {
    if (n_samples < 1) fail(Errc::BadParameters, "need n_samples >= 1");
    if (model.T <= model.L + kTol)
        fail(Errc::BadParameters, "stochastic solve is for T > L; use the deterministic path");
    const double T = model.T;
    const double L = model.L;
    const double t_span = L;

    StochasticSurfaceResult result;
    std::vector<std::vector<double>> sum, sumsq;
    std::size_t included = 0;

    std::size_t block = std::max<std::size_t>(worker_count(), 1);
    std::vector<PricingSurface> slot(block);
    std::vector<char> ok(block);

    for (std::size_t base = 0; base < n_samples; base += block) {
        std::size_t count = std::min(block, n_samples - base);
        parallel_for(count, [&](std::size_t j) {
            std::size_t i = base + j;
            ok[j] = 0;
            try {
                Path path = simulate_path(model, scheme, NoiseStream(seed, i));
                if (path.nonpositive()) return;
                auto sigma = [&](double tau) {
                    double s = T - tau - L;
                    return s >= 0.0 ? model.g.at_value(path.at(s))
                                    : lagged_sigma(model.g, model.memory, s);
                };
                slot[j] = march_surface(claim, grid, sigma, curves, T, t_span, cfg);
                ok[j] = 1;
            } catch (const Error& e) {
                if (e.code() == Errc::NonFiniteValue || e.code() == Errc::SingularImplicitStep ||
                    e.code() == Errc::BreakdownNotConverged)
                    return;  // sample skipped and reported
                throw;
            }
        });
        for (std::size_t j = 0; j < count; ++j) {
            if (!ok[j]) {
                ++result.n_excluded;
                continue;
            }
            const PricingSurface& s = slot[j];
            if (sum.empty()) {
                sum.assign(s.values.size(), std::vector<double>(s.values[0].size(), 0.0));
                sumsq = sum;
                result.mean = s;  // lattice/bc snapshot; values overwritten below
            }
            for (std::size_t r = 0; r < sum.size(); ++r)
                for (std::size_t c = 0; c < sum[r].size(); ++c) {
                    double x = s.values[r][c];
                    sum[r][c] += x;
                    sumsq[r][c] += x * x;
                }
            ++included;
        }
    }
    if (included == 0) fail(Errc::AllPathsExcluded, "every sample was excluded");

    double n = static_cast<double>(included);
    result.mean.stochastic = true;
    result.mean.n_samples = n_samples;
    result.mean.seed = seed;
    result.stddev.assign(sum.size(), std::vector<double>(sum[0].size(), 0.0));
    for (std::size_t r = 0; r < sum.size(); ++r)
        for (std::size_t c = 0; c < sum[r].size(); ++c) {
            double mean = sum[r][c] / n;
            result.mean.values[r][c] = mean;
            if (included > 1) {
                double var = (sumsq[r][c] - n * mean * mean) / (n - 1.0);
                result.stddev[r][c] = std::sqrt(std::max(var, 0.0));
            }
        }
    return result;
}

double black_scholes_call(double v, double B, double r, double sigma, double tau_remaining) {
    if (v < 0.0 || !(sigma > 0.0) || tau_remaining < 0.0 || !(B > 0.0))
        fail(Errc::BadParameters, "black_scholes_call: need v >= 0, sigma > 0, tau >= 0, B > 0");
    if (v == 0.0) return 0.0;
    if (tau_remaining == 0.0) return std::max(v - B, 0.0);
    double st = sigma * std::sqrt(tau_remaining);
    double d1 = (std::log(v / B) + (r + 0.5 * sigma * sigma) * tau_remaining) / st;
    double d2 = d1 - st;
    return v * normal_cdf(d1) - B * std::exp(-r * tau_remaining) * normal_cdf(d2);
}

PricingSurface debt_from_identity(const PricingSurface& equity) {
    if (equity.claim != ClaimKind::equity)
        fail(Errc::BadParameters, "debt_from_identity expects an equity surface");
    PricingSurface debt = equity;
    debt.claim = ClaimKind::debt;
    for (std::size_t r = 0; r < debt.values.size(); ++r)
        for (std::size_t c = 0; c < debt.values[r].size(); ++c)
            debt.values[r][c] = equity.grid.centers[c] - equity.values[r][c];
    for (std::size_t r = 0; r < debt.upper_bc.size(); ++r)
        debt.upper_bc[r] = equity.grid.v_max - equity.upper_bc[r];
    return debt;
}

double debt_equity_identity_check(const PricingSurface& equity, const PricingSurface& debt) {
    if (equity.claim != ClaimKind::equity || debt.claim != ClaimKind::debt)
        fail(Errc::LatticeMismatch, "expected one equity and one debt surface");
    if (!equity.same_lattice(debt)) fail(Errc::LatticeMismatch, "surfaces on different lattices");
    double worst = 0.0;
    for (std::size_t r = 0; r < equity.values.size(); ++r)
        for (std::size_t c = 0; c < equity.values[r].size(); ++c) {
            double dev = std::abs(equity.values[r][c] + debt.values[r][c] -
                                  equity.grid.centers[c]);
            worst = std::max(worst, dev);
        }
    return worst;
}

}  // namespace delaycredit
