#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <vector>

#include "spnl/analytic.hpp"
#include "spnl/experiment.hpp"

// Statistical convergence of the binned estimator across three decades of
// shot counts. Slow; lives in its own binary.

using namespace spnl;

TEST_CASE("binned S converges to the closed form with 1/sqrt(N) errors") {
    const std::vector<long long> ladder{10000, 100000, 1000000};
    std::vector<double> mean_errs;

    for (long long shots : ladder) {
        auto cfg = experiment::ExperimentConfig::defaults_for_scheme(3);
        cfg.shots = shots;
        cfg.seed = 1618;
        cfg.threads = 4;
        const auto records = experiment::run_chsh_experiment(cfg);
        const auto est = experiment::bin_and_estimate(records, cfg.bins);

        double err_sum = 0.0;
        int valid = 0;
        for (const auto& b : est.bins) {
            if (!b.valid) continue;
            ++valid;
            err_sum += b.s_err;
            const double target = analytic::s_at_optimum_from_cos(b.mean_c);
            CHECK(std::abs(b.s - target) < 4.0 * b.s_err);
        }
        REQUIRE(valid >= 12);
        mean_errs.push_back(err_sum / valid);
        std::printf("shots=%lld valid_bins=%d mean_S_err=%.5f\n", shots, valid,
                    mean_errs.back());
    }

    // least-squares slope of log(err) vs log(shots); expect -1/2 within 20%
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(ladder.size());
    for (int i = 0; i < n; ++i) {
        const double x = std::log(double(ladder[i]));
        const double y = std::log(mean_errs[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    std::printf("error slope = %.4f\n", slope);
    CHECK(slope == doctest::Approx(-0.5).epsilon(0.2));
}
