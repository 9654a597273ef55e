#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Self-verification: cross-checks the closed-form module against the exact
// simulator, adjudicates the remainder-readout conventions, and exercises the
// Monte Carlo harness against its analytic limits.

namespace spnl::verify {

struct CheckResult {
    std::string name;
    double measured = 0.0;   // deviation or statistic being judged
    double tolerance = 0.0;  // threshold it must stay under
    bool pass = false;
    std::string note;
};

struct VerifyOptions {
    double tol_exact = 1e-10;       // analytic vs exact-simulation grids
    double tol_quadrature = 1e-8;   // mixed-state representation equivalence
    long long mc_shots = 100000;    // Monte Carlo cross-checks
    std::uint64_t seed = 20240901;
    int quadrature_points = 64;
};

std::vector<CheckResult> run_verification(const VerifyOptions& options);

}  // namespace spnl::verify
