#pragma once

#include <span>
#include <vector>

#include "delaycredit/dense.hpp"
#include "delaycredit/tridiagonal.hpp"

namespace delaycredit {

struct ExpIntConfig {
    int krylov_dim = 10;    ///< Arnoldi subspace dimension
    double tol = 1e-6;      ///< relative (max-norm) accuracy of phi evaluations
    int p = 2;              ///< polynomial order of the source reconstruction
    int max_halvings = 10;  ///< substep halvings before BreakdownNotConverged
    bool force_dense = false;  ///< evaluate through the dense phi path regardless of size

    void validate() const;
};

/// Scalar phi family: phi_0 = exp, phi_{l+1}(x) = (phi_l(x) - 1/l!) / x,
/// with a Taylor series near x = 0 where the recurrence cancels.
double phi_scalar(int l, double x);

/// Evaluation context for phi_0(dtau A) f + sum_l dtau^l phi_l(dtau A) b_l
/// at fixed (A, dtau). The Krylov backend is stateless per call; the dense
/// backend precomputes phi matrices so repeated applications are cheap.
class PhiApplier {
public:
    PhiApplier(const TridiagonalMatrix& a, double dtau, const ExpIntConfig& cfg);

    /// phi_0(dtau A) f + sum_{l=1..b.size()} dtau^l phi_l(dtau A) b_l.
    std::vector<double> combination(std::span<const double> f,
                                    const std::vector<std::vector<double>>& b) const;

    bool dense_backend() const { return dense_; }
    double dtau() const { return dtau_; }

private:
    const TridiagonalMatrix* a_;
    double dtau_;
    ExpIntConfig cfg_;
    bool dense_;
    std::vector<DenseMatrix> phi_;  // dense backend only
};

/// One-call form of PhiApplier::combination.
std::vector<double> krylov_phi_action(const TridiagonalMatrix& a, std::span<const double> f,
                                      const std::vector<std::vector<double>>& b, double dtau,
                                      const ExpIntConfig& cfg);

/// ETD1: f_{n+1} = phi_0(dtau A) f_n + dtau phi_1(dtau A) b_n
/// (phi form of the order-1 exponential scheme; valid for singular A).
std::vector<double> etd1_step(std::span<const double> f, const TridiagonalMatrix& a,
                              std::span<const double> b, double dtau, const ExpIntConfig& cfg);
std::vector<double> etd1_step(const PhiApplier& applier, std::span<const double> f,
                              std::span<const double> b);

/// ETD2 (p = 2): linear-in-tau source reconstruction from the endpoint
/// values b_n, b_{n+1}:
/// f_{n+1} = phi_0 f_n + dtau phi_1 b_n + dtau^2 phi_2 (b_{n+1}-b_n)/dtau.
std::vector<double> etd2_step(std::span<const double> f, const TridiagonalMatrix& a,
                              std::span<const double> b_n, std::span<const double> b_np1,
                              double dtau, const ExpIntConfig& cfg);
std::vector<double> etd2_step(const PhiApplier& applier, std::span<const double> f,
                              std::span<const double> b_n, std::span<const double> b_np1);

}  // namespace delaycredit
