#include "delaycredit/expint.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "delaycredit/errors.hpp"

namespace delaycredit {

void ExpIntConfig::validate() const {
    if (krylov_dim < 2) fail(Errc::BadParameters, "krylov_dim must be >= 2");
    if (!(tol > 0.0)) fail(Errc::BadParameters, "tol must be positive");
    if (p != 1 && p != 2) fail(Errc::BadParameters, "p must be 1 or 2");
    if (max_halvings < 0) fail(Errc::BadParameters, "max_halvings must be >= 0");
}

double phi_scalar(int l, double x) {
    if (l < 0) fail(Errc::BadParameters, "phi order must be >= 0");
    if (std::abs(x) < 1e-2) {
        // truncated Taylor: sum_{k=0}^{11} x^k / (k+l)!
        double fact = 1.0;
        for (int j = 2; j <= l; ++j) fact *= j;  // l!
        double term = 1.0 / fact;
        double sum = term;
        for (int k = 1; k < 12; ++k) {
            term *= x / static_cast<double>(k + l);
            sum += term;
        }
        return sum;
    }
    double phi = std::exp(x);
    double fact = 1.0;
    for (int j = 0; j < l; ++j) {
        phi = (phi - 1.0 / fact) / x;
        fact *= static_cast<double>(j + 1);
    }
    return phi;
}

namespace {

// Augmented operator [[A, W], [0, J]] applied matrix-free; W columns are
// [b_p, ..., b_1] and J is the upper shift, so e^{tau Atilde}[f; e_p] top
// equals phi_0(tau A) f + sum_l tau^l phi_l(tau A) b_l.
struct AugmentedOp {
    const TridiagonalMatrix* a;
    const std::vector<std::vector<double>>* b;  // b[l-1] = b_l
    std::size_t n, p;

    std::size_t dim() const { return n + p; }

    void apply(const std::vector<double>& x, std::vector<double>& out) const {
        out.assign(dim(), 0.0);
        a->apply(std::span<const double>(x.data(), n), std::span<double>(out.data(), n));
        for (std::size_t j = 0; j < p; ++j) {
            const std::vector<double>& col = (*b)[p - 1 - j];  // column j holds b_{p-j}
            double y = x[n + j];
            if (y != 0.0)
                for (std::size_t i = 0; i < n; ++i) out[i] += col[i] * y;
        }
        for (std::size_t k = 0; k + 1 < p; ++k) out[n + k] = x[n + k + 1];
        if (p > 0) out[n + p - 1] = 0.0;
    }

    double norm_est() const {
        double norm = a->norm_inf();
        for (const auto& col : *b) {
            double m = 0.0;
            for (double v : col) m = std::max(m, std::abs(v));
            norm = std::max(norm, m);
        }
        return std::max(norm, 1.0);
    }
};

double nrm2(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

double nrminf(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s = std::max(s, std::abs(v));
    return s;
}

struct ArnoldiResult {
    std::vector<std::vector<double>> v;  // basis vectors, size k+1 (or k on breakdown)
    DenseMatrix h;                       // (k+1) x k with the residual entry at (k, k-1)
    std::size_t k = 0;                   // subspace size
    bool breakdown = false;
    double beta = 0.0;
    std::vector<double> av_last;  // Atilde * v_{k+1} when no breakdown
};

ArnoldiResult arnoldi(const AugmentedOp& op, const std::vector<double>& u, std::size_t m) {
    ArnoldiResult res;
    res.beta = nrm2(u);
    std::size_t dim = op.dim();
    m = std::min(m, dim);
    res.h = DenseMatrix(m + 1, m);
    if (res.beta == 0.0) {
        res.breakdown = true;
        return res;
    }
    res.v.emplace_back(u);
    for (double& x : res.v[0]) x /= res.beta;

    std::vector<double> w(dim);
    for (std::size_t j = 0; j < m; ++j) {
        op.apply(res.v[j], w);
        double pre = nrm2(w);
        for (std::size_t i = 0; i <= j; ++i) {
            double hij = 0.0;
            for (std::size_t t = 0; t < dim; ++t) hij += res.v[i][t] * w[t];
            res.h(i, j) += hij;
            for (std::size_t t = 0; t < dim; ++t) w[t] -= hij * res.v[i][t];
        }
        // one reorthogonalization pass
        for (std::size_t i = 0; i <= j; ++i) {
            double c = 0.0;
            for (std::size_t t = 0; t < dim; ++t) c += res.v[i][t] * w[t];
            if (c != 0.0) {
                res.h(i, j) += c;
                for (std::size_t t = 0; t < dim; ++t) w[t] -= c * res.v[i][t];
            }
        }
        double hj = nrm2(w);
        res.h(j + 1, j) = hj;
        res.k = j + 1;
        if (hj <= 1e-13 * (pre + 1e-300)) {
            res.breakdown = true;
            return res;
        }
        res.v.emplace_back(w);
        for (double& x : res.v.back()) x /= hj;
    }
    return res;
}

// expm of the (k+2) augmented small matrix [[tau H, [e_1, 0]], [0, J]];
// the last two columns expose e_k^T phi_1 and e_k^T phi_2 read-offs.
DenseMatrix small_exp_with_probes(const DenseMatrix& h, std::size_t k, double tau) {
    DenseMatrix m(k + 2, k + 2);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) m(i, j) = tau * h(i, j);
    m(0, k) = 1.0;      // column k: phi_1(tau H) e_1
    m(k, k + 1) = 1.0;  // chain: column k+1 gives phi_2(tau H) e_1
    return expm_pade(m);
}

std::vector<double> krylov_combination(const TridiagonalMatrix& a, std::span<const double> f,
                                       const std::vector<std::vector<double>>& b, double dtau,
                                       const ExpIntConfig& cfg);

std::vector<double> dense_combination(const TridiagonalMatrix& a, std::span<const double> f,
                                      const std::vector<std::vector<double>>& b, double dtau) {
    return dense_phi_combination(a, std::vector<double>(f.begin(), f.end()), b, dtau);
}

std::vector<double> krylov_combination(const TridiagonalMatrix& a, std::span<const double> f,
                                       const std::vector<std::vector<double>>& b, double dtau,
                                       const ExpIntConfig& cfg) {
    const std::size_t n = a.size();
    const std::size_t p = b.size();
    AugmentedOp op{&a, &b, n, p};

    std::vector<double> u(n + p, 0.0);
    std::copy(f.begin(), f.end(), u.begin());
    if (p > 0) u[n + p - 1] = 1.0;

    if (nrm2(u) == 0.0) return std::vector<double>(n, 0.0);

    double t_done = 0.0;
    double t_step = dtau;
    int halvings = 0;
    const std::size_t m = static_cast<std::size_t>(cfg.krylov_dim);

    while (t_done < dtau) {
        t_step = std::min(t_step, dtau - t_done);
        ArnoldiResult ar = arnoldi(op, u, m);
        if (ar.beta == 0.0) break;  // state identically zero stays zero

        bool accepted = false;
        while (!accepted) {
            double tau = ar.breakdown ? (dtau - t_done) : t_step;
            DenseMatrix fsm = small_exp_with_probes(ar.h, ar.k, tau);

            double err_loc = 0.0;
            if (!ar.breakdown) {
                double hres = ar.h(ar.k, ar.k - 1);
                double err1 = ar.beta * hres * tau * std::abs(fsm(ar.k - 1, ar.k));
                std::vector<double> av(op.dim());
                op.apply(ar.v[ar.k], av);
                double avnorm = nrm2(av);
                double err2 =
                    ar.beta * hres * tau * tau * std::abs(fsm(ar.k - 1, ar.k + 1)) * avnorm;
                if (err1 > 10.0 * err2)
                    err_loc = err2;
                else if (err1 > err2)
                    err_loc = err1 * err2 / (err1 - err2);
                else
                    err_loc = err1;
            }

            std::vector<double> u_next(op.dim(), 0.0);
            for (std::size_t j = 0; j < ar.k; ++j) {
                double coef = ar.beta * fsm(j, 0);
                if (coef == 0.0) continue;
                for (std::size_t t = 0; t < op.dim(); ++t) u_next[t] += coef * ar.v[j][t];
            }

            double scale = std::max(nrminf(u_next), 1e-300);
            double allowance = 0.25 * cfg.tol * scale * (tau / dtau);
            if (ar.breakdown || err_loc <= allowance) {
                u = std::move(u_next);
                t_done += tau;
                if (!ar.breakdown && err_loc < 0.05 * allowance) t_step = 2.0 * t_step;
                accepted = true;
            } else {
                if (halvings >= cfg.max_halvings) {
                    if (n <= 64) return dense_combination(a, f, b, dtau);
                    fail(Errc::BreakdownNotConverged,
                         "Krylov substep did not converge after " +
                             std::to_string(cfg.max_halvings) + " halvings; dtau too large");
                }
                ++halvings;
                t_step *= 0.5;
            }
        }
    }
    return std::vector<double>(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(n));
}

}  // namespace

PhiApplier::PhiApplier(const TridiagonalMatrix& a, double dtau, const ExpIntConfig& cfg)
    : a_(&a), dtau_(dtau), cfg_(cfg) {
    cfg_.validate();
    if (!(dtau > 0.0)) fail(Errc::BadParameters, "dtau must be positive");
    for (double x : a.diag)
        if (!std::isfinite(x)) fail(Errc::NonFiniteCoefficient, "operator has non-finite entries");
    dense_ = cfg_.force_dense || a.size() <= static_cast<std::size_t>(cfg_.krylov_dim);
    if (dense_) {
        DenseMatrix ad = DenseMatrix::from_tridiagonal(a).scaled(dtau);
        phi_ = dense_phi_matrices(ad, std::max(cfg_.p, 2));
    }
}

std::vector<double> PhiApplier::combination(std::span<const double> f,
                                            const std::vector<std::vector<double>>& b) const {
    if (f.size() != a_->size()) fail(Errc::BadParameters, "phi combination: f size mismatch");
    for (const auto& col : b)
        if (col.size() != a_->size()) fail(Errc::BadParameters, "phi combination: b size mismatch");
    if (dense_) {
        if (b.size() + 1 > phi_.size())
            fail(Errc::BadParameters, "phi combination: more b terms than precomputed orders");
        std::vector<double> out = phi_[0].apply(std::vector<double>(f.begin(), f.end()));
        double power = 1.0;
        for (std::size_t l = 1; l <= b.size(); ++l) {
            power *= dtau_;
            std::vector<double> term = phi_[l].apply(b[l - 1]);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += power * term[i];
        }
        return out;
    }
    return krylov_combination(*a_, f, b, dtau_, cfg_);
}

std::vector<double> krylov_phi_action(const TridiagonalMatrix& a, std::span<const double> f,
                                      const std::vector<std::vector<double>>& b, double dtau,
                                      const ExpIntConfig& cfg) {
    return PhiApplier(a, dtau, cfg).combination(f, b);
}

std::vector<double> etd1_step(const PhiApplier& applier, std::span<const double> f,
                              std::span<const double> b) {
    return applier.combination(f, {std::vector<double>(b.begin(), b.end())});
}

std::vector<double> etd1_step(std::span<const double> f, const TridiagonalMatrix& a,
                              std::span<const double> b, double dtau, const ExpIntConfig& cfg) {
    return etd1_step(PhiApplier(a, dtau, cfg), f, b);
}

std::vector<double> etd2_step(const PhiApplier& applier, std::span<const double> f,
                              std::span<const double> b_n, std::span<const double> b_np1) {
    if (b_n.size() != b_np1.size()) fail(Errc::BadParameters, "etd2: b size mismatch");
    std::vector<double> b1(b_n.begin(), b_n.end());
    std::vector<double> b2(b_n.size());
    double inv = 1.0 / applier.dtau();
    for (std::size_t i = 0; i < b2.size(); ++i) b2[i] = (b_np1[i] - b_n[i]) * inv;
    return applier.combination(f, {std::move(b1), std::move(b2)});
}

std::vector<double> etd2_step(std::span<const double> f, const TridiagonalMatrix& a,
                              std::span<const double> b_n, std::span<const double> b_np1,
                              double dtau, const ExpIntConfig& cfg) {
    return etd2_step(PhiApplier(a, dtau, cfg), f, b_n, b_np1);
}

}  // namespace delaycredit
