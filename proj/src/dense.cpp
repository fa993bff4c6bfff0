#include "delaycredit/dense.hpp"

#include <algorithm>
#include <cmath>

#include "delaycredit/errors.hpp"
#include "delaycredit/parallel.hpp"

namespace delaycredit {

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::from_tridiagonal(const TridiagonalMatrix& t) {
    std::size_t n = t.size();
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = t.diag[i];
        if (i > 0) m(i, i - 1) = t.sub[i];
        if (i + 1 < n) m(i, i + 1) = t.super[i];
    }
    return m;
}

DenseMatrix DenseMatrix::operator*(const DenseMatrix& other) const {
    if (cols_ != other.rows_) fail(Errc::BadParameters, "dense multiply: shape mismatch");
    DenseMatrix out(rows_, other.cols_);
    auto row_block = [&](std::size_t i) {
        for (std::size_t k = 0; k < cols_; ++k) {
            double aik = (*this)(i, k);
            if (aik == 0.0) continue;
            const double* src = &other.a_[k * other.cols_];
            double* dst = &out.a_[i * other.cols_];
            for (std::size_t j = 0; j < other.cols_; ++j) dst[j] += aik * src[j];
        }
    };
    if (rows_ >= 128) {
        parallel_for(rows_, row_block);
    } else {
        for (std::size_t i = 0; i < rows_; ++i) row_block(i);
    }
    return out;
}

DenseMatrix DenseMatrix::operator+(const DenseMatrix& other) const {
    if (rows_ != other.rows_ || cols_ != other.cols_)
        fail(Errc::BadParameters, "dense add: shape mismatch");
    DenseMatrix out(rows_, cols_);
    for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] = a_[i] + other.a_[i];
    return out;
}

DenseMatrix DenseMatrix::scaled(double s) const {
    DenseMatrix out(rows_, cols_);
    for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] = a_[i] * s;
    return out;
}

std::vector<double> DenseMatrix::apply(const std::vector<double>& x) const {
    if (x.size() != cols_) fail(Errc::BadParameters, "dense apply: size mismatch");
    std::vector<double> out(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) acc += (*this)(i, j) * x[j];
        out[i] = acc;
    }
    return out;
}

double DenseMatrix::norm_inf() const {
    double best = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
        best = std::max(best, s);
    }
    return best;
}

namespace {

// Dense LU solve with partial pivoting, AX = B in place; returns X.
DenseMatrix lu_solve(DenseMatrix a, DenseMatrix b) {
    std::size_t n = a.rows();
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
            for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(col, j), b(piv, j));
        }
        double d = a(col, col);
        if (d == 0.0) fail(Errc::BadParameters, "singular matrix in Pade solve");
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = a(r, col) / d;
            if (f == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
            for (std::size_t j = 0; j < b.cols(); ++j) b(r, j) -= f * b(col, j);
        }
    }
    for (std::size_t col = n; col-- > 0;) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double acc = b(col, j);
            for (std::size_t k = col + 1; k < n; ++k) acc -= a(col, k) * b(k, j);
            b(col, j) = acc / a(col, col);
        }
    }
    return b;
}

}  // namespace

DenseMatrix expm_pade(const DenseMatrix& a) {
    // Diagonal Pade(13) with scaling chosen so ||A||/2^s <= 0.5.
    static const double c[14] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
    std::size_t n = a.rows();
    double norm = a.norm_inf();
    int s = 0;
    if (norm > 0.5) s = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    DenseMatrix as = a.scaled(std::pow(2.0, -s));

    DenseMatrix a2 = as * as;
    DenseMatrix a4 = a2 * a2;
    DenseMatrix a6 = a2 * a4;
    DenseMatrix id = DenseMatrix::identity(n);

    DenseMatrix u_inner = a6.scaled(c[13]) + a4.scaled(c[11]) + a2.scaled(c[9]);
    DenseMatrix u = as * (a6 * u_inner + a6.scaled(c[7]) + a4.scaled(c[5]) + a2.scaled(c[3]) +
                          id.scaled(c[1]));
    DenseMatrix v_inner = a6.scaled(c[12]) + a4.scaled(c[10]) + a2.scaled(c[8]);
    DenseMatrix v = a6 * v_inner + a6.scaled(c[6]) + a4.scaled(c[4]) + a2.scaled(c[2]) +
                    id.scaled(c[0]);

    DenseMatrix num = v + u;
    DenseMatrix den = v + u.scaled(-1.0);
    DenseMatrix r = lu_solve(den, num);
    for (int k = 0; k < s; ++k) r = r * r;
    return r;
}

std::vector<DenseMatrix> dense_phi_matrices(const DenseMatrix& a, int p) {
    if (p < 0) fail(Errc::BadParameters, "need p >= 0");
    std::size_t n = a.rows();
    double norm = a.norm_inf();
    int s = 0;
    if (norm > 1.0) s = static_cast<int>(std::ceil(std::log2(norm)));
    DenseMatrix as = a.scaled(std::pow(2.0, -s));

    // phi_l(X) = sum_k X^k / (k+l)! ; with ||X|| <= 1, 24 terms are far below
    // double precision. Powers are built once and shared across the orders.
    const int terms = 24;
    std::vector<DenseMatrix> pow_as;
    pow_as.reserve(terms + 1);
    pow_as.push_back(DenseMatrix::identity(n));
    for (int k = 1; k <= terms; ++k) pow_as.push_back(pow_as.back() * as);

    std::vector<DenseMatrix> phi;
    phi.reserve(static_cast<std::size_t>(p) + 1);
    for (int l = 0; l <= p; ++l) {
        DenseMatrix acc(n, n);
        double fact = 1.0;
        for (int j = 2; j <= l; ++j) fact *= j;  // l!
        double coef = 1.0 / fact;
        for (int k = 0; k <= terms; ++k) {
            acc = acc + pow_as[static_cast<std::size_t>(k)].scaled(coef);
            coef /= static_cast<double>(k + l + 1);
        }
        phi.push_back(acc);
    }

    // Squaring step: phi_l(2X) = 2^{-l} [ phi_0(X) phi_l(X) + sum_{j=1..l} phi_j(X) / (l-j)! ].
    for (int step = 0; step < s; ++step) {
        std::vector<DenseMatrix> next;
        next.reserve(phi.size());
        for (int l = 0; l <= p; ++l) {
            DenseMatrix acc = phi[0] * phi[static_cast<std::size_t>(l)];
            for (int j = 1; j <= l; ++j) {
                double fact = 1.0;
                for (int m = 2; m <= l - j; ++m) fact *= m;
                acc = acc + phi[static_cast<std::size_t>(j)].scaled(1.0 / fact);
            }
            next.push_back(acc.scaled(std::pow(2.0, -l)));
        }
        phi = std::move(next);
    }
    return phi;
}

std::vector<double> dense_phi_combination(const TridiagonalMatrix& a, const std::vector<double>& f,
                                          const std::vector<std::vector<double>>& b, double dtau) {
    std::size_t n = a.size();
    DenseMatrix ad = DenseMatrix::from_tridiagonal(a).scaled(dtau);
    std::vector<DenseMatrix> phi = dense_phi_matrices(ad, static_cast<int>(b.size()));
    std::vector<double> out = phi[0].apply(f);
    double power = 1.0;
    for (std::size_t l = 1; l <= b.size(); ++l) {
        power *= dtau;
        std::vector<double> term = phi[l].apply(b[l - 1]);
        for (std::size_t i = 0; i < n; ++i) out[i] += power * term[i];
    }
    return out;
}

}  // namespace delaycredit
