#include "delaycredit/pde.hpp"

#include <cmath>
#include <string>

#include "delaycredit/errors.hpp"

namespace delaycredit {

bool Grid::same_lattice(const Grid& other) const {
    return n == other.n && std::abs(v_max - other.v_max) <= 1e-12 * v_max;
}

Grid build_grid(double B, long n, double vmax_multiple) {
    if (!(B > 0.0)) fail(Errc::BadParameters, "B must be positive");
    if (n < 3) fail(Errc::BadParameters, "need at least 3 cells");
    if (!(vmax_multiple >= 3.0 && vmax_multiple <= 4.0))
        fail(Errc::BadParameters, "vmax_multiple must lie in [3, 4]");
    Grid g;
    g.n = n;
    g.v_max = vmax_multiple * B;
    g.h = g.v_max / static_cast<double>(n);
    g.centers.resize(static_cast<std::size_t>(n));
    for (long i = 1; i <= n; ++i)
        g.centers[static_cast<std::size_t>(i - 1)] = (2.0 * static_cast<double>(i) - 1.0) * g.h / 2.0;
    return g;
}

PayoffSmoother::PayoffSmoother(double eps) : epsilon(eps), c{} {
    if (!(eps > 0.0)) fail(Errc::BadParameters, "epsilon must be positive");
    c[0] = 35.0 * eps / 256.0;
    c[1] = 0.5;
    c[2] = 35.0 / (64.0 * eps);
    c[4] = -35.0 / (128.0 * eps * eps * eps);
    c[6] = 7.0 / (64.0 * std::pow(eps, 5));
    c[8] = -5.0 / (256.0 * std::pow(eps, 7));
}

double PayoffSmoother::operator()(double x) const {
    if (x >= epsilon) return x;
    if (x <= -epsilon) return 0.0;
    double acc = c[9];
    for (int j = 9; j-- > 0;) acc = acc * x + c[static_cast<std::size_t>(j)];
    return acc;
}

double PayoffSmoother::polynomial_derivative(double x, int order) const {
    if (order < 0) fail(Errc::BadParameters, "derivative order must be >= 0");
    double acc = 0.0;
    for (int j = 9; j >= order; --j) {
        double coef = c[static_cast<std::size_t>(j)];
        for (int m = 0; m < order; ++m) coef *= static_cast<double>(j - m);
        acc = acc * x + coef;
    }
    return acc;
}

double smooth_payoff(double x, double epsilon) { return PayoffSmoother(epsilon)(x); }

double ClaimSpec::terminal(double v, const PayoffSmoother& smoother) const {
    double eq = smoother(v - B);
    return kind == ClaimKind::equity ? eq : v - eq;
}

double ClaimSpec::upper_bc(double v_max, double discount) const {
    double debt = B * discount;
    return kind == ClaimKind::equity ? v_max - debt : debt;
}

double ClaimSpec::source_rate(double C_tau, double C_y_tau) const {
    return kind == ClaimKind::equity ? C_tau - C_y_tau : C_y_tau;
}

StencilRow diffusion_row(long i, const Grid& grid, double sigma_eff, double lower_bc,
                         double upper_bc) {
    if (i < 1 || i > grid.n) fail(Errc::BadParameters, "row index out of range");
    double v = grid.center(i);
    double d = sigma_eff * sigma_eff * v * v;
    double h2 = grid.h * grid.h;
    StencilRow row;
    if (i == 1) {
        double c = 2.0 * d / (3.0 * h2);
        row.super = c;
        row.diag = -3.0 * c;
        row.k = 2.0 * c * lower_bc;
    } else if (i == grid.n) {
        double c = 2.0 * d / (3.0 * h2);
        row.sub = c;
        row.diag = -3.0 * c;
        row.k = 2.0 * c * upper_bc;
    } else {
        double c = d / (2.0 * h2);
        row.sub = c;
        row.diag = -2.0 * c;
        row.super = c;
    }
    return row;
}

StencilRow convection_row(long i, const Grid& grid, double r_tau, double c_tau, double lower_bc,
                          double upper_bc, UpwindRule rule) {
    if (i < 1 || i > grid.n) fail(Errc::BadParameters, "row index out of range");
    double v = grid.center(i);
    double h = grid.h;
    double flux_r = r_tau * (v + h / 2.0) - c_tau;
    double flux_l = r_tau * (v - h / 2.0) - c_tau;
    StencilRow row;

    // right face: + flux_r / h on the donor value
    {
        double w = flux_r / h;
        if (flux_r >= 0.0) {
            row.diag += w;  // donor f_i
        } else if (rule == UpwindRule::paper) {
            if (i >= 2)
                row.sub += w;  // donor f_{i-1}
            else
                row.k += w * lower_bc;
        } else {
            if (i <= grid.n - 1)
                row.super += w;  // donor f_{i+1}
            else
                row.k += w * upper_bc;
        }
    }
    // left face: - flux_l / h on the donor value
    {
        double w = -flux_l / h;
        if (flux_l >= 0.0) {
            if (i >= 2)
                row.sub += w;  // donor f_{i-1}
            else
                row.k += w * lower_bc;
        } else if (rule == UpwindRule::paper) {
            // donor f_{i-2}: band-clamped to f_{i-1} in the interior,
            // boundary value when the index falls at or below 0
            if (i >= 3)
                row.sub += w;
            else
                row.k += w * lower_bc;
        } else {
            row.diag += w;  // donor f_i
        }
    }
    row.diag += -2.0 * r_tau;
    return row;
}

DiscreteOperator assemble(const Grid& grid, const ClaimSpec& claim, double sigma_eff, double r_tau,
                          double c_tau, double c_y_tau, double discount, UpwindRule rule) {
    std::size_t n = static_cast<std::size_t>(grid.n);
    DiscreteOperator op;
    op.A = TridiagonalMatrix(n);
    op.source.assign(n, 0.0);
    double lower = claim.lower_bc();
    double upper = claim.upper_bc(grid.v_max, discount);
    double src = claim.source_rate(c_tau, c_y_tau);

    for (long i = 1; i <= grid.n; ++i) {
        StencilRow diff = diffusion_row(i, grid, sigma_eff, lower, upper);
        StencilRow conv = convection_row(i, grid, r_tau, c_tau, lower, upper, rule);
        std::size_t k = static_cast<std::size_t>(i - 1);
        op.A.sub[k] = diff.sub + conv.sub;
        op.A.diag[k] = diff.diag + conv.diag;
        op.A.super[k] = diff.super + conv.super;
        op.source[k] = src + diff.k + conv.k;
        if (!std::isfinite(op.A.diag[k]) || !std::isfinite(op.A.sub[k]) ||
            !std::isfinite(op.A.super[k]) || !std::isfinite(op.source[k]))
            fail(Errc::NonFiniteCoefficient, "non-finite operator entry at row " + std::to_string(i));
    }
    op.A.sub[0] = 0.0;
    op.A.super[n - 1] = 0.0;
    return op;
}

}  // namespace delaycredit
