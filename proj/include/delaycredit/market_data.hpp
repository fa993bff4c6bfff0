#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "delaycredit/step_curve.hpp"

namespace delaycredit {

/// One calendar year of firm observations (spec of the firm CSV row).
struct YearRow {
    double year;    ///< calendar year, fractional allowed
    double r;       ///< risk-free rate per year
    double sigma;   ///< stddev of daily returns, annualized
    long n_obs;     ///< daily return count behind sigma (>= 150)
    double B;       ///< total book debt, millions
    double V;       ///< total firm asset value, millions
    double C;       ///< total payout per year, millions
    double C_y;     ///< debt payout per year, millions
};

/// Validated yearly series for one firm; rows sorted by strictly
/// increasing year.
struct FirmSeries {
    std::string firm_id;
    std::vector<YearRow> rows;

    double first_year() const { return rows.front().year; }
    double last_year() const { return rows.back().year; }
    /// Linear interpolation of V at a (possibly fractional) year.
    double value_at(double year) const;
    /// Linear interpolation of B at a (possibly fractional) year.
    double debt_at(double year) const;
};

/// Load and validate a firm CSV (header `year,r,sigma,n_obs,B,V,C,C_y`).
FirmSeries load_firm_csv(const std::filesystem::path& path);

/// Firm-value history on [-L, 0] (model time; 0 = valuation origin),
/// linear interpolation between knots.
class MemoryPath {
public:
    MemoryPath(std::vector<double> times, std::vector<double> values);

    /// Value at lag time s in [-L, 0]; inputs are clamped to the span
    /// within a small tolerance and rejected beyond it.
    double operator()(double s) const;

    double delay() const { return -times_.front(); }
    const std::vector<double>& knot_times() const { return times_; }
    const std::vector<double>& knot_values() const { return values_; }

private:
    std::vector<double> times_;
    std::vector<double> values_;
};

/// Memory path over [origin-L, origin], expressed in lag time [-L, 0].
MemoryPath build_memory_path(const FirmSeries& series, double origin, double L);

enum class VolKind {
    time_interp_linear,
    time_interp_quadratic,
    time_interp_spline,
    value_fit_quadratic,
    constant_mean,
};

const char* vol_kind_name(VolKind kind);

/// Volatility function g. Time-interp kinds are functions of the lag time
/// (knots at the memory-window data years); value_fit_quadratic is a
/// least-squares parabola in the firm value; constant_mean is the Merton
/// volatility. Every evaluation is clamped to [clamp_lo, clamp_hi].
class VolatilityModel {
public:
    static VolatilityModel constant(double sigma);

    VolKind kind() const { return kind_; }
    bool time_kind() const {
        return kind_ == VolKind::time_interp_linear || kind_ == VolKind::time_interp_quadratic ||
               kind_ == VolKind::time_interp_spline;
    }

    /// sigma as a function of lag time s in [-L, 0] (time kinds and
    /// constant_mean; value kinds must be composed with a memory path).
    double at_lag_time(double s) const;

    /// sigma as a function of the firm value (value kinds and constant_mean).
    double at_value(double v) const;

    double clamp_lo() const { return clamp_lo_; }
    double clamp_hi() const { return clamp_hi_; }

    /// Copy with the clamp replaced (collapsing to [s, s] pins g to a constant).
    VolatilityModel with_clamp(double lo, double hi) const;

private:
    friend VolatilityModel fit_volatility(const FirmSeries&, double, double, VolKind);
    VolatilityModel() = default;

    double raw_at_lag_time(double s) const;
    double clamp(double x) const;

    VolKind kind_ = VolKind::constant_mean;
    std::vector<double> times_;    // lag-time knots (time kinds)
    std::vector<double> sigmas_;   // sigma at knots
    std::vector<double> spline_m_; // natural-spline second derivatives
    double quad_a_ = 0.0, quad_b_ = 0.0, quad_c_ = 0.0;  // value-fit coefficients
    double mean_ = 0.0;
    double clamp_lo_ = 0.0, clamp_hi_ = 0.0;
};

VolatilityModel fit_volatility(const FirmSeries& series, double origin, double L, VolKind kind);

/// g evaluated at a memory lag: time kinds read the interpolant, value
/// kinds are composed with the memory path.
double lagged_sigma(const VolatilityModel& g, const MemoryPath& memory, double s);

/// Piecewise-constant coefficient curves in calendar time.
struct CoefficientCurves {
    StepCurve r, C, C_y, alpha;
};

/// Yearly coefficient curves for a simulation lattice of spacing dt
/// (dt must divide one year).
CoefficientCurves resample_coefficients(const FirmSeries& series, double dt);

}  // namespace delaycredit
