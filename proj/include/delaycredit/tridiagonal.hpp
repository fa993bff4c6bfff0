#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "delaycredit/errors.hpp"

namespace delaycredit {

/// Tridiagonal matrix stored as three length-n bands; sub[0] and
/// super[n-1] are unused and kept at zero.
struct TridiagonalMatrix {
    std::vector<double> sub, diag, super;

    TridiagonalMatrix() = default;
    explicit TridiagonalMatrix(std::size_t n) : sub(n, 0.0), diag(n, 0.0), super(n, 0.0) {}

    std::size_t size() const { return diag.size(); }

    void apply(std::span<const double> x, std::span<double> out) const {
        std::size_t n = size();
        if (x.size() != n || out.size() != n)
            fail(Errc::BadParameters, "tridiagonal apply: size mismatch");
        for (std::size_t i = 0; i < n; ++i) {
            double acc = diag[i] * x[i];
            if (i > 0) acc += sub[i] * x[i - 1];
            if (i + 1 < n) acc += super[i] * x[i + 1];
            out[i] = acc;
        }
    }

    std::vector<double> apply(std::span<const double> x) const {
        std::vector<double> out(size());
        apply(x, out);
        return out;
    }

    /// Largest row sum of absolute values (infinity norm).
    double norm_inf() const {
        double best = 0.0;
        for (std::size_t i = 0; i < size(); ++i) {
            double s = std::abs(diag[i]);
            if (i > 0) s += std::abs(sub[i]);
            if (i + 1 < size()) s += std::abs(super[i]);
            if (s > best) best = s;
        }
        return best;
    }
};

}  // namespace delaycredit
