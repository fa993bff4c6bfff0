#include "delaycredit/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "delaycredit/errors.hpp"

namespace delaycredit {

namespace {

constexpr double kYearTol = 1e-9;

double lerp_series(const std::vector<YearRow>& rows, double year, double YearRow::*field) {
    if (year <= rows.front().year) return rows.front().*field;
    if (year >= rows.back().year) return rows.back().*field;
    auto it = std::upper_bound(rows.begin(), rows.end(), year,
                               [](double y, const YearRow& row) { return y < row.year; });
    const YearRow& hi = *it;
    const YearRow& lo = *(it - 1);
    double w = (year - lo.year) / (hi.year - lo.year);
    return (1.0 - w) * (lo.*field) + w * (hi.*field);
}

double interp_linear(const std::vector<double>& x, const std::vector<double>& y, double t) {
    if (t <= x.front()) return y.front();
    if (t >= x.back()) return y.back();
    auto it = std::upper_bound(x.begin(), x.end(), t);
    size_t j = static_cast<size_t>(it - x.begin());
    double w = (t - x[j - 1]) / (x[j] - x[j - 1]);
    return (1.0 - w) * y[j - 1] + w * y[j];
}

// Local 3-point Lagrange interpolation; stencil centered on the segment.
double interp_quadratic(const std::vector<double>& x, const std::vector<double>& y, double t) {
    size_t n = x.size();
    if (t <= x.front()) return y.front();
    if (t >= x.back()) return y.back();
    size_t seg = static_cast<size_t>(std::upper_bound(x.begin(), x.end(), t) - x.begin()) - 1;
    size_t k = std::min(std::max<size_t>(seg, 1), n - 2);
    double x0 = x[k - 1], x1 = x[k], x2 = x[k + 1];
    double l0 = (t - x1) * (t - x2) / ((x0 - x1) * (x0 - x2));
    double l1 = (t - x0) * (t - x2) / ((x1 - x0) * (x1 - x2));
    double l2 = (t - x0) * (t - x1) / ((x2 - x0) * (x2 - x1));
    return y[k - 1] * l0 + y[k] * l1 + y[k + 1] * l2;
}

// Natural cubic spline second derivatives.
std::vector<double> spline_moments(const std::vector<double>& x, const std::vector<double>& y) {
    size_t n = x.size();
    std::vector<double> m(n, 0.0), u(n, 0.0), z(n, 0.0);
    for (size_t i = 1; i + 1 < n; ++i) {
        double hi = x[i] - x[i - 1];
        double hi1 = x[i + 1] - x[i];
        double alpha = 3.0 * ((y[i + 1] - y[i]) / hi1 - (y[i] - y[i - 1]) / hi);
        double l = 2.0 * (x[i + 1] - x[i - 1]) - hi * u[i - 1];
        u[i] = hi1 / l;
        z[i] = (alpha - hi * z[i - 1]) / l;
    }
    for (size_t i = n - 1; i-- > 1;) m[i] = z[i] - u[i] * m[i + 1];
    return m;
}

double spline_eval(const std::vector<double>& x, const std::vector<double>& y,
                   const std::vector<double>& m, double t) {
    if (t <= x.front()) return y.front();
    if (t >= x.back()) return y.back();
    size_t j = static_cast<size_t>(std::upper_bound(x.begin(), x.end(), t) - x.begin());
    double h = x[j] - x[j - 1];
    double a = (x[j] - t) / h, b = (t - x[j - 1]) / h;
    return a * y[j - 1] + b * y[j] +
           ((a * a * a - a) * m[j - 1] + (b * b * b - b) * m[j]) * h * h / 6.0;
}

}  // namespace

double FirmSeries::value_at(double year) const { return lerp_series(rows, year, &YearRow::V); }
double FirmSeries::debt_at(double year) const { return lerp_series(rows, year, &YearRow::B); }

FirmSeries load_firm_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::IoError, "cannot open firm CSV: " + path.string());

    std::string line;
    // skip comment lines (config stamps start with '#')
    do {
        if (!std::getline(in, line)) fail(Errc::MissingColumn, "empty file: " + path.string());
    } while (!line.empty() && line[0] == '#');
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "year,r,sigma,n_obs,B,V,C,C_y")
        fail(Errc::MissingColumn, "expected header year,r,sigma,n_obs,B,V,C,C_y, got '" + line + "'");

    FirmSeries series;
    series.firm_id = path.stem().string();
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        std::vector<double> vals;
        while (std::getline(ss, field, ',')) {
            try {
                size_t used = 0;
                vals.push_back(std::stod(field, &used));
                if (used != field.size()) throw std::invalid_argument(field);
            } catch (const std::exception&) {
                fail(Errc::MalformedRow,
                     "line " + std::to_string(lineno) + ": bad number '" + field + "'");
            }
        }
        if (vals.size() != 8)
            fail(Errc::MissingColumn, "line " + std::to_string(lineno) + ": expected 8 fields, got " +
                                          std::to_string(vals.size()));
        YearRow row{vals[0], vals[1], vals[2], static_cast<long>(std::llround(vals[3])),
                    vals[4], vals[5], vals[6], vals[7]};
        series.rows.push_back(row);
    }
    if (series.rows.size() < 2) fail(Errc::MissingColumn, "need at least 2 data rows");

    std::sort(series.rows.begin(), series.rows.end(),
              [](const YearRow& a, const YearRow& b) { return a.year < b.year; });
    for (size_t i = 0; i < series.rows.size(); ++i) {
        const YearRow& row = series.rows[i];
        if (i > 0 && !(row.year > series.rows[i - 1].year + kYearTol))
            fail(Errc::NonMonotoneYears, "duplicate or non-increasing year " + std::to_string(row.year));
        if (row.n_obs < 150)
            fail(Errc::NObsTooSmall, "year " + std::to_string(row.year) + ": n_obs=" +
                                         std::to_string(row.n_obs) + " < 150");
        if (!(row.sigma > 0.0) || !(row.V > 0.0) || row.B < 0.0 || row.r < 0.0)
            fail(Errc::NonPositiveValue, "year " + std::to_string(row.year) +
                                             ": need sigma>0, V>0, B>=0, r>=0");
    }
    return series;
}

MemoryPath::MemoryPath(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
    if (times_.size() < 2 || times_.size() != values_.size())
        fail(Errc::BadParameters, "memory path needs >= 2 knots");
    if (!std::is_sorted(times_.begin(), times_.end()))
        fail(Errc::BadParameters, "memory path knots must be sorted");
    if (std::abs(times_.back()) > kYearTol)
        fail(Errc::BadParameters, "memory path must end at lag time 0");
    for (double v : values_)
        if (!(v > 0.0) || !std::isfinite(v))
            fail(Errc::NonPositiveValue, "memory path values must be positive and finite");
}

double MemoryPath::operator()(double s) const {
    double L = delay();
    if (s < -L - 1e-9 * std::max(1.0, L) || s > 1e-9)
        fail(Errc::LagOutOfMemory, "lag time " + std::to_string(s) + " outside [-L, 0], L=" +
                                       std::to_string(L));
    return interp_linear(times_, values_, s);
}

MemoryPath build_memory_path(const FirmSeries& series, double origin, double L) {
    if (!(L > 0.0))
        fail(Errc::WindowNotCovered, "delay must be positive");
    double start = origin - L;
    if (series.first_year() > start + kYearTol || series.last_year() < origin - kYearTol)
        fail(Errc::WindowNotCovered, "series does not cover [" + std::to_string(start) + ", " +
                                         std::to_string(origin) + "]");
    std::vector<double> times{-L};
    std::vector<double> values{series.value_at(start)};
    for (const YearRow& row : series.rows) {
        if (row.year > start + kYearTol && row.year < origin - kYearTol) {
            times.push_back(row.year - origin);
            values.push_back(row.V);
        }
    }
    times.push_back(0.0);
    values.push_back(series.value_at(origin));
    return MemoryPath(std::move(times), std::move(values));
}

const char* vol_kind_name(VolKind kind) {
    switch (kind) {
        case VolKind::time_interp_linear: return "time_interp_linear";
        case VolKind::time_interp_quadratic: return "time_interp_quadratic";
        case VolKind::time_interp_spline: return "time_interp_spline";
        case VolKind::value_fit_quadratic: return "value_fit_quadratic";
        case VolKind::constant_mean: return "constant_mean";
    }
    return "unknown";
}

VolatilityModel VolatilityModel::constant(double sigma) {
    VolatilityModel m;
    m.kind_ = VolKind::constant_mean;
    m.mean_ = sigma;
    m.clamp_lo_ = sigma;
    m.clamp_hi_ = sigma;
    return m;
}

double VolatilityModel::clamp(double x) const {
    return std::min(std::max(x, clamp_lo_), clamp_hi_);
}

double VolatilityModel::raw_at_lag_time(double s) const {
    switch (kind_) {
        case VolKind::time_interp_linear: return interp_linear(times_, sigmas_, s);
        case VolKind::time_interp_quadratic: return interp_quadratic(times_, sigmas_, s);
        case VolKind::time_interp_spline: return spline_eval(times_, sigmas_, spline_m_, s);
        case VolKind::constant_mean: return mean_;
        case VolKind::value_fit_quadratic:
            fail(Errc::BadParameters, "value_fit_quadratic has no direct time evaluation");
    }
    fail(Errc::BadParameters, "unknown volatility kind");
}

double VolatilityModel::at_lag_time(double s) const { return clamp(raw_at_lag_time(s)); }

double VolatilityModel::at_value(double v) const {
    switch (kind_) {
        case VolKind::value_fit_quadratic:
            return clamp(quad_a_ + quad_b_ * v + quad_c_ * v * v);
        case VolKind::constant_mean:
            return clamp(mean_);
        default:
            fail(Errc::BadParameters,
                 std::string(vol_kind_name(kind_)) + " cannot be evaluated at a firm value");
    }
}

VolatilityModel VolatilityModel::with_clamp(double lo, double hi) const {
    if (!(lo <= hi) || !(lo > 0.0))
        fail(Errc::BadParameters, "volatility clamp needs 0 < lo <= hi");
    VolatilityModel copy(*this);
    copy.clamp_lo_ = lo;
    copy.clamp_hi_ = hi;
    return copy;
}

VolatilityModel fit_volatility(const FirmSeries& series, double origin, double L, VolKind kind) {
    if (!(L > 0.0)) fail(Errc::WindowNotCovered, "delay must be positive");
    double start = origin - L;
    if (series.first_year() > start + kYearTol || series.last_year() < origin - kYearTol)
        fail(Errc::WindowNotCovered, "series does not cover the memory window");

    std::vector<double> times, sigmas, values;
    for (const YearRow& row : series.rows) {
        if (row.year >= start - kYearTol && row.year <= origin + kYearTol) {
            times.push_back(row.year - origin);
            sigmas.push_back(row.sigma);
            values.push_back(row.V);
        }
    }
    size_t need = 1;
    switch (kind) {
        case VolKind::time_interp_linear: need = 2; break;
        case VolKind::time_interp_quadratic:
        case VolKind::time_interp_spline:
        case VolKind::value_fit_quadratic: need = 3; break;
        case VolKind::constant_mean: need = 1; break;
    }
    if (times.size() < need)
        fail(Errc::TooFewKnots, std::string(vol_kind_name(kind)) + " needs >= " +
                                    std::to_string(need) + " knots, window has " +
                                    std::to_string(times.size()));

    VolatilityModel m;
    m.kind_ = kind;
    m.times_ = times;
    m.sigmas_ = sigmas;
    m.clamp_lo_ = *std::min_element(sigmas.begin(), sigmas.end());
    m.clamp_hi_ = *std::max_element(sigmas.begin(), sigmas.end());
    m.mean_ = 0.0;
    for (double s : sigmas) m.mean_ += s;
    m.mean_ /= static_cast<double>(sigmas.size());

    if (kind == VolKind::time_interp_spline) m.spline_m_ = spline_moments(times, sigmas);

    if (kind == VolKind::value_fit_quadratic) {
        // Normal equations for sigma ~ a + b V + c V^2.
        double s0 = static_cast<double>(values.size());
        double s1 = 0, s2 = 0, s3 = 0, s4 = 0, t0 = 0, t1 = 0, t2 = 0;
        for (size_t i = 0; i < values.size(); ++i) {
            double v = values[i], w = sigmas[i];
            s1 += v; s2 += v * v; s3 += v * v * v; s4 += v * v * v * v;
            t0 += w; t1 += w * v; t2 += w * v * v;
        }
        double M[3][4] = {{s0, s1, s2, t0}, {s1, s2, s3, t1}, {s2, s3, s4, t2}};
        for (int col = 0; col < 3; ++col) {
            int piv = col;
            for (int r2 = col + 1; r2 < 3; ++r2)
                if (std::abs(M[r2][col]) > std::abs(M[piv][col])) piv = r2;
            std::swap(M[col], M[piv]);
            if (std::abs(M[col][col]) < 1e-14)
                fail(Errc::TooFewKnots, "degenerate value grid for quadratic fit");
            for (int r2 = 0; r2 < 3; ++r2) {
                if (r2 == col) continue;
                double fct = M[r2][col] / M[col][col];
                for (int c2 = col; c2 < 4; ++c2) M[r2][c2] -= fct * M[col][c2];
            }
        }
        m.quad_a_ = M[0][3] / M[0][0];
        m.quad_b_ = M[1][3] / M[1][1];
        m.quad_c_ = M[2][3] / M[2][2];
    }
    return m;
}

double lagged_sigma(const VolatilityModel& g, const MemoryPath& memory, double s) {
    if (g.time_kind()) return g.at_lag_time(s);
    return g.at_value(memory(s));
}

CoefficientCurves resample_coefficients(const FirmSeries& series, double dt) {
    if (!(dt > 0.0)) fail(Errc::DtNotAligned, "dt must be positive");
    double steps = 1.0 / dt;
    if (std::abs(steps - std::round(steps)) > kYearTol * steps)
        fail(Errc::DtNotAligned, "dt=" + std::to_string(dt) + " does not divide one year");
    std::vector<double> years;
    std::vector<double> r, C, C_y;
    years.reserve(series.rows.size());
    for (const YearRow& row : series.rows) {
        years.push_back(row.year);
        r.push_back(row.r);
        C.push_back(row.C);
        C_y.push_back(row.C_y);
    }
    CoefficientCurves curves;
    curves.r = StepCurve(years, r);
    curves.C = StepCurve(years, C);
    curves.C_y = StepCurve(years, C_y);
    curves.alpha = curves.r;  // alpha defaults to the same-year risk-free rate
    return curves;
}

}  // namespace delaycredit
