#pragma once

#include <array>
#include <vector>

#include "delaycredit/step_curve.hpp"
#include "delaycredit/tridiagonal.hpp"

namespace delaycredit {

/// Cell-centered grid on [0, V_max]: v_i = (2i-1)h/2 for i = 1..N, h = V_max/N.
struct Grid {
    long n = 0;
    double v_max = 0.0;
    double h = 0.0;
    std::vector<double> centers;

    double center(long i) const { return centers[static_cast<std::size_t>(i - 1)]; }  // 1-based
    bool same_lattice(const Grid& other) const;
};

/// V_max = vmax_multiple * B (three to four strikes, per usual truncation).
Grid build_grid(double B, long n, double vmax_multiple = 4.0);

/// Degree-9 polynomial smoothing of max(x, 0) on [-eps, eps] with C^4 gluing.
struct PayoffSmoother {
    double epsilon;
    std::array<double, 10> c;

    explicit PayoffSmoother(double eps);
    double operator()(double x) const;
    /// order-th derivative of the middle polynomial (for gluing checks).
    double polynomial_derivative(double x, int order) const;
};

double smooth_payoff(double x, double epsilon);

enum class ClaimKind { equity, debt };

enum class UpwindRule { paper, standard };

/// Claim contract: terminal payoff, Dirichlet data, and source routing.
/// Equity pays max(v-B,0) with source C - C_y; debt pays min(v,B) with
/// source C_y. The smoothed debt terminal is v - pi_eps(v-B) so that
/// equity + debt = v holds exactly under smoothing.
struct ClaimSpec {
    ClaimKind kind;
    double B;

    double terminal(double v, const PayoffSmoother& smoother) const;
    double lower_bc() const { return 0.0; }
    /// Boundary value at v = V_max; discount = exp(-int_{T-tau}^{T} r).
    double upper_bc(double v_max, double discount) const;
    double source_rate(double C_tau, double C_y_tau) const;
};

/// Tridiagonal A(tau) plus source b(tau) of the semi-discrete system
/// df/dtau = A(tau) f + b(tau).
struct DiscreteOperator {
    TridiagonalMatrix A;
    std::vector<double> source;

    std::size_t size() const { return A.size(); }
};

/// One row of stencil contributions; k carries boundary-value terms routed
/// to the source (already multiplied by the Dirichlet data).
struct StencilRow {
    double sub = 0.0;
    double diag = 0.0;
    double super = 0.0;
    double k = 0.0;
};

/// Diffusion stencil for row i (1-based): interior rows are the centered
/// second difference; rows 1 and N use the one-sided 2/(3h) boundary forms.
StencilRow diffusion_row(long i, const Grid& grid, double sigma_eff, double lower_bc,
                         double upper_bc);

/// Conservation-form upwind convection for row i plus the -2r reaction.
/// Face fluxes are r*v_{i+-1/2} - C; a nonnegative face flux donates the
/// left cell, a negative one donates f_{i-1} (paper rule) or f_{i+1}
/// (standard rule). Out-of-band donors are boundary values (routed to k)
/// or clamped to the band.
StencilRow convection_row(long i, const Grid& grid, double r_tau, double c_tau, double lower_bc,
                          double upper_bc, UpwindRule rule);

/// Assemble A(tau) and b(tau) for one claim at one tau.
DiscreteOperator assemble(const Grid& grid, const ClaimSpec& claim, double sigma_eff, double r_tau,
                          double c_tau, double c_y_tau, double discount, UpwindRule rule);

}  // namespace delaycredit
