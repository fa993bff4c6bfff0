#pragma once

#include <cstddef>
#include <vector>

#include "delaycredit/tridiagonal.hpp"

namespace delaycredit {

/// Small row-major dense matrix for the phi-function oracle and the
/// Arnoldi inner kernel. Not meant for large n.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {}

    static DenseMatrix identity(std::size_t n);
    static DenseMatrix from_tridiagonal(const TridiagonalMatrix& t);

    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    DenseMatrix operator*(const DenseMatrix& other) const;
    DenseMatrix operator+(const DenseMatrix& other) const;
    DenseMatrix scaled(double s) const;
    std::vector<double> apply(const std::vector<double>& x) const;
    double norm_inf() const;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

/// e^A by scaling-and-squaring with a diagonal Pade(13) approximant.
DenseMatrix expm_pade(const DenseMatrix& a);

/// phi_0..phi_p of A by truncated Taylor series on a scaled matrix followed
/// by the phi squaring relations; independent of the Pade kernel.
std::vector<DenseMatrix> dense_phi_matrices(const DenseMatrix& a, int p);

/// phi_0(dtau A) f + sum_{l=1..p} dtau^l phi_l(dtau A) b_l evaluated densely
/// (test oracle / small-problem path).
std::vector<double> dense_phi_combination(const TridiagonalMatrix& a,
                                          const std::vector<double>& f,
                                          const std::vector<std::vector<double>>& b, double dtau);

}  // namespace delaycredit
