#include "delaycredit/step_curve.hpp"

#include <algorithm>
#include <cmath>

#include "delaycredit/errors.hpp"

namespace delaycredit {

StepCurve::StepCurve(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
    if (knots_.empty() || knots_.size() != values_.size())
        fail(Errc::BadParameters, "step curve needs matching, nonempty knots/values");
    if (!std::is_sorted(knots_.begin(), knots_.end()))
        fail(Errc::BadParameters, "step curve knots must be sorted");
    for (double v : values_)
        if (!std::isfinite(v)) fail(Errc::NonFiniteCoefficient, "step curve value not finite");
}

StepCurve StepCurve::constant(double value) { return StepCurve({0.0}, {value}); }

double StepCurve::operator()(double t) const {
    if (values_.empty()) fail(Errc::BadParameters, "empty step curve");
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    if (it == knots_.begin()) return values_.front();
    return values_[static_cast<size_t>(it - knots_.begin()) - 1];
}

double StepCurve::integrate(double a, double b) const {
    if (values_.empty()) fail(Errc::BadParameters, "empty step curve");
    if (b < a) fail(Errc::BadParameters, "integrate needs a <= b");
    double total = 0.0;
    double t = a;
    while (t < b) {
        auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
        double next = (it == knots_.end()) ? b : std::min(b, *it);
        if (next <= t) next = b;  // guard against zero-width segments
        total += (*this)(t) * (next - t);
        t = next;
    }
    return total;
}

StepCurve StepCurve::shifted(double origin) const {
    std::vector<double> k(knots_);
    for (double& x : k) x -= origin;
    return StepCurve(std::move(k), values_);
}

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::MissingColumn: return "MissingColumn";
        case Errc::MalformedRow: return "MalformedRow";
        case Errc::NonMonotoneYears: return "NonMonotoneYears";
        case Errc::NObsTooSmall: return "NObsTooSmall";
        case Errc::NonPositiveValue: return "NonPositiveValue";
        case Errc::WindowNotCovered: return "WindowNotCovered";
        case Errc::TooFewKnots: return "TooFewKnots";
        case Errc::DtNotAligned: return "DtNotAligned";
        case Errc::SingularImplicitStep: return "SingularImplicitStep";
        case Errc::NonFiniteValue: return "NonFiniteValue";
        case Errc::AllPathsExcluded: return "AllPathsExcluded";
        case Errc::BadParameters: return "BadParameters";
        case Errc::NonFiniteCoefficient: return "NonFiniteCoefficient";
        case Errc::BreakdownNotConverged: return "BreakdownNotConverged";
        case Errc::LagOutOfMemory: return "LagOutOfMemory";
        case Errc::LatticeMismatch: return "LatticeMismatch";
        case Errc::IoError: return "IoError";
    }
    return "UnknownError";
}

}  // namespace delaycredit
