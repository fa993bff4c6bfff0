#pragma once

#include <vector>

namespace delaycredit {

/// Right-continuous piecewise-constant curve: value(t) = values[i] for
/// t in [knots[i], knots[i+1]), extended flat on both sides.
class StepCurve {
public:
    StepCurve() = default;
    StepCurve(std::vector<double> knots, std::vector<double> values);

    static StepCurve constant(double value);

    double operator()(double t) const;

    /// Exact integral over [a, b] (piecewise sum, a <= b).
    double integrate(double a, double b) const;

    /// Same curve with knots shifted so that `origin` maps to 0.
    StepCurve shifted(double origin) const;

    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& values() const { return values_; }
    bool empty() const { return values_.empty(); }

private:
    std::vector<double> knots_;
    std::vector<double> values_;
};

}  // namespace delaycredit
