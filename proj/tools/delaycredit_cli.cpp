#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "delaycredit/errors.hpp"
#include "delaycredit/market_data.hpp"
#include "delaycredit/monte_carlo.hpp"
#include "delaycredit/pricing.hpp"
#include "delaycredit/sdde.hpp"
#include "delaycredit/verify.hpp"

namespace dc = delaycredit;

namespace {

struct RunConfig {
    std::string firm_csv;
    double origin = 2000.5;
    double L = 9.5;
    double T = 9.5;
    double theta = 1.0;
    std::size_t n_paths = 400;
    std::uint64_t seed = 0;
    long grid_n = 400;
    double dtau = 1.0 / 365.0;
    std::string vol_fit = "quadratic";
    double vmax_mult = 4.0;
    double epsilon = -1.0;  // <= 0: one cell width
    std::string upwind = "paper";
    double B_override = -1.0;  // <= 0: read from the series at maturity
    std::string out = "delaycredit_";
    bool verbose = false;
    double tamper_c0 = 1.0;
};

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

dc::VolKind parse_vol_kind(const std::string& name) {
    if (name == "linear") return dc::VolKind::time_interp_linear;
    if (name == "quadratic") return dc::VolKind::time_interp_quadratic;
    if (name == "spline") return dc::VolKind::time_interp_spline;
    if (name == "value-quadratic") return dc::VolKind::value_fit_quadratic;
    if (name == "mean") return dc::VolKind::constant_mean;
    dc::fail(dc::Errc::BadParameters, "unknown --vol-fit '" + name + "'");
}

dc::UpwindRule parse_upwind(const std::string& name) {
    if (name == "paper") return dc::UpwindRule::paper;
    if (name == "standard") return dc::UpwindRule::standard;
    dc::fail(dc::Errc::BadParameters, "unknown --upwind '" + name + "'");
}

double frac_part(double x) { return x - std::floor(x); }

/// Smallest steps-per-year k >= round(1/dtau) making every span an integer
/// number of steps (piecewise-constant yearly coefficients must not be
/// straddled, and the delay must be an integer multiple of dt).
long aligned_steps_per_year(double dtau_req, const std::vector<double>& spans) {
    long k0 = std::max<long>(1, std::lround(1.0 / dtau_req));
    for (long k = k0; k <= k0 + 1000; ++k) {
        bool ok = true;
        for (double s : spans) {
            double x = s * static_cast<double>(k);
            if (std::abs(x - std::round(x)) > 1e-6) {
                ok = false;
                break;
            }
        }
        if (ok) return k;
    }
    dc::fail(dc::Errc::DtNotAligned,
             "no aligned step count near 1/dtau = " + std::to_string(1.0 / dtau_req));
}

struct FirmContext {
    dc::FirmSeries series;
    dc::MemoryPath memory;
    dc::VolatilityModel g;
    dc::CoefficientCurves calendar;  // calendar-time curves
    dc::MarketCurves model_curves;   // shifted to model time (0 = origin)
    dc::StepCurve alpha_model;
    double B = 0.0;

    FirmContext(const RunConfig& cfg, double dt_for_resample)
        : series(dc::load_firm_csv(cfg.firm_csv)),
          memory(dc::build_memory_path(series, cfg.origin, cfg.L)),
          g(dc::fit_volatility(series, cfg.origin, cfg.L, parse_vol_kind(cfg.vol_fit))),
          calendar(dc::resample_coefficients(series, dt_for_resample)) {
        model_curves.r = calendar.r.shifted(cfg.origin);
        model_curves.C = calendar.C.shifted(cfg.origin);
        model_curves.C_y = calendar.C_y.shifted(cfg.origin);
        alpha_model = calendar.alpha.shifted(cfg.origin);
        double maturity = cfg.origin + cfg.T;
        B = cfg.B_override > 0.0 ? cfg.B_override : series.debt_at(maturity);
    }
};

std::string config_stamp(const char* command, const RunConfig& c, long steps_per_year) {
    std::string s = "# delaycredit ";
    s += command;
    s += " --firm " + c.firm_csv;
    s += " --origin " + fmt17(c.origin);
    s += " --L " + fmt17(c.L);
    s += " --T " + fmt17(c.T);
    s += " --theta " + fmt17(c.theta);
    s += " --paths " + std::to_string(c.n_paths);
    s += " --seed " + std::to_string(c.seed);
    s += " --grid " + std::to_string(c.grid_n);
    s += " --dtau " + fmt17(c.dtau);
    s += " --vol-fit " + c.vol_fit;
    s += " --vmax-mult " + fmt17(c.vmax_mult);
    s += " --epsilon " + fmt17(c.epsilon);
    s += " --upwind " + c.upwind;
    if (c.B_override > 0.0) s += " --B " + fmt17(c.B_override);
    s += " --out " + c.out;
    s += " | steps-per-year " + std::to_string(steps_per_year);
    return s;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) dc::fail(dc::Errc::IoError, "cannot write " + path);
    return f;
}

int cmd_simulate(const RunConfig& cfg) {
    long spy = aligned_steps_per_year(
        cfg.dtau, {1.0, cfg.L, cfg.T, frac_part(cfg.origin)});
    double dt = 1.0 / static_cast<double>(spy);
    FirmContext firm(cfg, dt);
    dc::SddeModel model(firm.alpha_model, firm.model_curves.C, firm.g, firm.memory, cfg.L, cfg.T);
    dc::SchemeConfig scheme =
        dc::SchemeConfig::make(cfg.theta, cfg.T, cfg.L, std::lround(cfg.T * spy));
    dc::Ensemble ens = dc::run_ensemble(model, scheme, cfg.n_paths, cfg.seed);
    std::string stamp = config_stamp("simulate", cfg, spy);

    {
        auto f = open_out(cfg.out + "paths.csv");
        f << stamp << "\n";
        if (ens.n_paths() == 1) {
            f << "t,V\n";
        } else {
            f << "t";
            for (std::size_t p = 0; p < ens.n_paths(); ++p) f << ",path_" << p;
            f << "\n";
        }
        for (std::size_t k = 0; k < ens.times.size(); ++k) {
            f << fmt17(cfg.origin + ens.times[k]);
            for (std::size_t p = 0; p < ens.n_paths(); ++p) f << ',' << fmt17(ens.paths[p][k]);
            f << "\n";
        }
    }
    {
        auto mean = dc::mean_path(ens);
        auto sd = dc::stddev_path(ens);
        auto band = dc::confidence_band(ens, 0.95);
        auto f = open_out(cfg.out + "summary.csv");
        f << stamp << "\n";
        f << "t,mean,stddev,lower,upper,n_included\n";
        for (std::size_t k = 0; k < ens.times.size(); ++k) {
            f << fmt17(cfg.origin + ens.times[k]) << ',' << fmt17(mean[k]) << ',' << fmt17(sd[k])
              << ',' << fmt17(band.first[k]) << ',' << fmt17(band.second[k]) << ','
              << ens.n_included() << "\n";
        }
    }
    {
        auto f = open_out(cfg.out + "real.csv");
        f << stamp << "\n";
        f << "year,V_real\n";
        for (const auto& row : firm.series.rows) {
            if (row.year < cfg.origin - cfg.L - 1e-9 || row.year > cfg.origin + cfg.T + 1e-9)
                continue;
            f << fmt17(row.year) << ',' << fmt17(row.V) << "\n";
        }
    }
    std::fprintf(stdout, "simulate: %zu paths (%zu excluded), %ld steps, dt=1/%ld\n",
                 ens.n_paths(), ens.excluded.size(), scheme.m_steps, spy);
    return 0;
}

dc::PricingSurface price_surface(const RunConfig& cfg, const FirmContext& firm,
                                 dc::ClaimKind kind, long spy) {
    dc::ClaimSpec claim{kind, firm.B};
    dc::Grid grid = dc::build_grid(firm.B, cfg.grid_n, cfg.vmax_mult);
    dc::PricingConfig pc;
    pc.dtau = 1.0 / static_cast<double>(spy);
    pc.epsilon = cfg.epsilon;
    pc.upwind = parse_upwind(cfg.upwind);

    if (cfg.T <= cfg.L + 1e-9) {
        return dc::solve_surface_deterministic(claim, grid, firm.g, firm.memory,
                                               firm.model_curves, cfg.T, cfg.L, pc);
    }
    dc::SddeModel model(firm.alpha_model, firm.model_curves.C, firm.g, firm.memory, cfg.L, cfg.T);
    dc::SchemeConfig scheme =
        dc::SchemeConfig::make(cfg.theta, cfg.T, cfg.L, std::lround(cfg.T * spy));
    dc::StochasticSurfaceResult res = dc::solve_surface_stochastic(
        claim, grid, model, scheme, firm.model_curves, cfg.n_paths, cfg.seed, pc);
    std::fprintf(stdout, "stochastic pricing: %zu samples excluded\n", res.n_excluded);
    return std::move(res.mean);
}

void write_surface(const RunConfig& cfg, const dc::PricingSurface& surf,
                   const std::string& stamp) {
    auto f = open_out(cfg.out + "surface.csv");
    f << stamp << "\n";
    f << "tau";
    for (double v : surf.grid.centers) f << ',' << fmt17(v);
    f << "\n";
    for (std::size_t k = 0; k < surf.taus.size(); ++k) {
        f << fmt17(surf.taus[k]);
        for (double x : surf.values[k]) f << ',' << fmt17(x);
        f << "\n";
    }
}

void write_slice(const RunConfig& cfg, const FirmContext& firm, const dc::PricingSurface& surf,
                 dc::ClaimKind kind, const std::string& stamp) {
    double maturity = cfg.origin + cfg.T;
    double t_span = surf.taus.back();
    auto f = open_out(cfg.out + "slice.csv");
    f << stamp << "\n";
    f << "year,model_value,real_value\n";
    for (const auto& row : firm.series.rows) {
        if (row.year < maturity - t_span - 1e-9 || row.year > maturity + 1e-9) continue;
        double tau = maturity - row.year;
        double model_value = surf.value_at(row.V, tau);
        double real_value =
            kind == dc::ClaimKind::equity ? row.V - row.B : row.B;
        f << fmt17(row.year) << ',' << fmt17(model_value) << ',' << fmt17(real_value) << "\n";
    }
}

int cmd_price(const RunConfig& cfg, dc::ClaimKind kind) {
    double t_span = std::min(cfg.T, cfg.L);
    double maturity = cfg.origin + cfg.T;
    long spy = aligned_steps_per_year(
        cfg.dtau, {1.0, t_span, frac_part(maturity), cfg.T > cfg.L ? cfg.T : t_span, cfg.L,
                   frac_part(cfg.origin)});
    FirmContext firm(cfg, 1.0 / static_cast<double>(spy));
    dc::PricingSurface surf = price_surface(cfg, firm, kind, spy);
    std::string stamp = config_stamp(kind == dc::ClaimKind::equity ? "price-equity" : "price-debt",
                                     cfg, spy);
    write_surface(cfg, surf, stamp);
    write_slice(cfg, firm, surf, kind, stamp);
    std::fprintf(stdout, "priced %s: B=%s, grid %ld cells, %zu tau rows\n",
                 kind == dc::ClaimKind::equity ? "equity" : "debt", fmt17(firm.B).c_str(),
                 cfg.grid_n, surf.taus.size());
    return 0;
}

int cmd_compare(const RunConfig& cfg) {
    double t_span = std::min(cfg.T, cfg.L);
    double maturity = cfg.origin + cfg.T;
    long spy = aligned_steps_per_year(
        cfg.dtau, {1.0, t_span, frac_part(maturity), cfg.T, cfg.L, frac_part(cfg.origin)});
    FirmContext firm(cfg, 1.0 / static_cast<double>(spy));

    dc::PricingSurface delayed = price_surface(cfg, firm, dc::ClaimKind::equity, spy);

    dc::VolatilityModel merton_g =
        dc::fit_volatility(firm.series, cfg.origin, cfg.L, dc::VolKind::constant_mean);
    double sigma = merton_g.at_value(1.0);
    dc::ClaimSpec claim{dc::ClaimKind::equity, firm.B};
    dc::Grid grid = dc::build_grid(firm.B, cfg.grid_n, cfg.vmax_mult);
    dc::PricingConfig pc;
    pc.dtau = 1.0 / static_cast<double>(spy);
    pc.epsilon = cfg.epsilon;
    pc.upwind = parse_upwind(cfg.upwind);
    dc::PricingSurface merton =
        dc::solve_merton_surface(claim, grid, sigma, firm.model_curves, cfg.T, pc);

    std::string stamp = config_stamp("compare", cfg, spy);
    auto f = open_out(cfg.out + "compare.csv");
    f << stamp << "\n";
    f << "year,delayed,merton,real\n";
    double delayed_span = delayed.taus.back();
    for (const auto& row : firm.series.rows) {
        if (row.year < maturity - delayed_span - 1e-9 || row.year > maturity + 1e-9) continue;
        double tau = maturity - row.year;
        f << fmt17(row.year) << ',' << fmt17(delayed.value_at(row.V, tau)) << ','
          << fmt17(merton.value_at(row.V, tau)) << ',' << fmt17(row.V - row.B) << "\n";
    }
    std::fprintf(stdout, "compare: merton sigma=%s\n", fmt17(sigma).c_str());
    return 0;
}

int cmd_verify(const RunConfig& cfg, const std::string& self_path) {
    dc::VerifyOptions opt;
    opt.verbose = cfg.verbose;
    opt.tamper_c0_scale = cfg.tamper_c0;
    opt.cli_path = self_path;
    opt.fixture_csv = cfg.firm_csv;
    auto results = dc::run_acceptance_checks(opt);
    dc::print_check_results(results, cfg.verbose);
    return dc::all_passed(results) ? 0 : 1;
}

int exit_code_for(const dc::Error& e) {
    switch (e.code()) {
        case dc::Errc::IoError:
        case dc::Errc::MissingColumn:
        case dc::Errc::MalformedRow:
        case dc::Errc::NonMonotoneYears:
        case dc::Errc::NObsTooSmall:
        case dc::Errc::NonPositiveValue:
        case dc::Errc::WindowNotCovered:
        case dc::Errc::TooFewKnots:
        case dc::Errc::BadParameters:
        case dc::Errc::DtNotAligned:
        case dc::Errc::LatticeMismatch:
            return 2;
        default:
            return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"delaycredit: corporate debt/equity pricing under a stochastic-delay firm model"};
    app.require_subcommand(1);

    RunConfig cfg;
    auto add_common = [&cfg](CLI::App* sub) {
        sub->add_option("--firm", cfg.firm_csv, "firm CSV (year,r,sigma,n_obs,B,V,C,C_y)");
        sub->add_option("--origin", cfg.origin, "valuation origin year");
        sub->add_option("--L", cfg.L, "delay length, years");
        sub->add_option("--T", cfg.T, "horizon/maturity, years");
        sub->add_option("--theta", cfg.theta, "scheme weight in [0,1]");
        sub->add_option("--paths", cfg.n_paths, "Monte Carlo path count");
        sub->add_option("--seed", cfg.seed, "RNG seed");
        sub->add_option("--grid", cfg.grid_n, "FV cell count");
        sub->add_option("--dtau", cfg.dtau, "requested time step, years");
        sub->add_option("--vol-fit", cfg.vol_fit,
                        "volatility fit: linear|quadratic|spline|value-quadratic|mean");
        sub->add_option("--vmax-mult", cfg.vmax_mult, "V_max as a multiple of B (3..4)");
        sub->add_option("--epsilon", cfg.epsilon, "payoff smoothing width (<=0: one cell)");
        sub->add_option("--upwind", cfg.upwind, "negative-flux upwind rule: paper|standard");
        sub->add_option("--B", cfg.B_override, "promised debt payment override");
        sub->add_option("--out", cfg.out, "output path prefix");
        sub->add_flag("--verbose", cfg.verbose, "per-check timing lines");
    };

    CLI::App* sim = app.add_subcommand("simulate", "simulate firm-value paths and statistics");
    add_common(sim);
    CLI::App* peq = app.add_subcommand("price-equity", "price the equity claim");
    add_common(peq);
    CLI::App* pdb = app.add_subcommand("price-debt", "price the debt claim");
    add_common(pdb);
    CLI::App* cmp = app.add_subcommand("compare", "delayed vs Merton equity against real data");
    add_common(cmp);
    CLI::App* ver = app.add_subcommand("verify", "run the built-in verification suite");
    add_common(ver);
    ver->add_option("--tamper-c0", cfg.tamper_c0, "test hook: scale the smoother c0 coefficient");

    CLI11_PARSE(app, argc, argv);

    try {
        auto need_firm = [&]() {
            if (cfg.firm_csv.empty())
                dc::fail(dc::Errc::IoError, "--firm is required for this command");
        };
        if (sim->parsed()) {
            need_firm();
            return cmd_simulate(cfg);
        }
        if (peq->parsed()) {
            need_firm();
            return cmd_price(cfg, dc::ClaimKind::equity);
        }
        if (pdb->parsed()) {
            need_firm();
            return cmd_price(cfg, dc::ClaimKind::debt);
        }
        if (cmp->parsed()) {
            need_firm();
            return cmd_compare(cfg);
        }
        if (ver->parsed()) {
            need_firm();
            return cmd_verify(cfg, argv[0]);
        }
    } catch (const dc::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
