#pragma once

#include <string>
#include <vector>

namespace delaycredit {

struct CheckResult {
    std::string name;
    bool pass = false;
    double seconds = 0.0;
    double budget_seconds = 0.0;
    std::string detail;
};

struct VerifyOptions {
    bool verbose = false;
    /// Test hook: scales the smoother's constant coefficient inside the
    /// gluing check; any value != 1 must turn the suite red.
    double tamper_c0_scale = 1.0;
    /// CLI binary for the determinism check; empty skips it as a failure.
    std::string cli_path;
    std::string fixture_csv;
};

/// Runs the full acceptance suite; one result per criterion, in order.
std::vector<CheckResult> run_acceptance_checks(const VerifyOptions& options);

bool all_passed(const std::vector<CheckResult>& results);

/// Prints one pass/fail line per criterion (timings when verbose).
void print_check_results(const std::vector<CheckResult>& results, bool verbose);

}  // namespace delaycredit
