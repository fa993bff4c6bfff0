#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "delaycredit/sdde.hpp"

namespace delaycredit {

/// A batch of paths sharing one time lattice. Paths flagged non-positive or
/// non-finite stay in the lattice but are excluded from statistics.
struct Ensemble {
    std::vector<double> times;
    std::vector<std::vector<double>> paths;  // n_paths x (m_steps + 1)
    std::vector<std::size_t> excluded;       // ascending path indices
    std::uint64_t seed = 0;

    std::size_t n_paths() const { return paths.size(); }
    std::size_t n_included() const { return paths.size() - excluded.size(); }
    bool is_excluded(std::size_t i) const;
};

/// Simulate n_paths SDDE paths with stream ids 0..n_paths-1. Paths may run in
/// parallel; the result is a pure function of (model, scheme, n_paths, seed).
Ensemble run_ensemble(const SddeModel& model, const SchemeConfig& scheme, std::size_t n_paths,
                      std::uint64_t seed);

/// Merton counterpart of run_ensemble.
Ensemble run_merton_ensemble(double v0, const StepCurve& alpha, const StepCurve& C, double sigma,
                             const SchemeConfig& scheme, std::size_t n_paths, std::uint64_t seed);

/// Pointwise statistics over included paths, reduced in path-index order.
std::vector<double> mean_path(const Ensemble& ensemble);
std::vector<double> stddev_path(const Ensemble& ensemble);

/// mean +- z(level) * stddev / sqrt(n_included); level in (0, 1), e.g. 0.95.
std::pair<std::vector<double>, std::vector<double>> confidence_band(const Ensemble& ensemble,
                                                                    double level);

}  // namespace delaycredit
