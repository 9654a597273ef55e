#include "spnl/verify.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "spnl/analytic.hpp"
#include "spnl/experiment.hpp"
#include "spnl/schemes.hpp"

namespace spnl::verify {

namespace {

constexpr double kPi = 3.14159265358979323846;

CheckResult deviation_check(const std::string& name, double measured, double tolerance,
                            const std::string& note = "") {
    return {name, measured, tolerance, measured < tolerance, note};
}

double max_abs(double a, double b) { return std::max(std::abs(a), std::abs(b)); }

// Largest deviation between simulated and closed-form conditional pattern
// probabilities over an (xi, eta, dphi) grid.
double scheme1_grid_deviation(int nxi, int neta, int nphi, int cutoff) {
    double worst = 0.0;
    for (int i = 0; i < nxi; ++i) {
        const double xi = 0.1 + 2.0 * kPi * i / nxi;
        for (int j = 0; j < neta; ++j) {
            const double eta = 0.3 + 2.0 * kPi * j / neta;
            for (int k = 0; k < nphi; ++k) {
                const double dphi = 2.0 * kPi * k / nphi;
                const double phi_a = 0.37;
                const auto sim = schemes::run_scheme1_exact(xi, eta, phi_a, phi_a + dphi, cutoff);
                const auto ana = analytic::scheme1_pattern_probs(xi, eta, dphi).as_array();
                for (int p = 0; p < 4; ++p)
                    worst = std::max(worst, std::abs(sim.conditional[p] - ana[p]));
            }
        }
    }
    return worst;
}

}  // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& opt) {
    std::vector<CheckResult> checks;

    // CHSH combination of the four closed-form correlations collapses to the
    // single-variable S formula.
    {
        double worst = 0.0;
        for (int i = 0; i < 17; ++i)
            for (int j = 0; j < 13; ++j)
                for (int k = 0; k < 11; ++k) {
                    const double xi = 2.0 * kPi * i / 17, eta = 2.0 * kPi * j / 13,
                                 dphi = 2.0 * kPi * k / 11;
                    const double via_quad =
                        analytic::chsh_s(analytic::scheme1_correlation_quad(xi, eta, dphi));
                    worst = std::max(worst,
                                     std::abs(via_quad - analytic::s_scheme1(xi - eta, dphi)));
                }
        checks.push_back(deviation_check("chsh_identity_grid", worst, 1e-12));
    }

    checks.push_back(deviation_check("scheme1_sim_vs_analytic_grid",
                                     scheme1_grid_deviation(5, 5, 8, 4), opt.tol_exact));

    // Scheme 2 reproduces scheme 1 at the pinned phase difference.
    {
        double worst = 0.0;
        for (double xi : {0.0, 0.7, 2.1}) {
            for (double eta : {0.4, 1.9}) {
                const auto fixed = schemes::run_scheme1_exact(xi, eta, 0.0, kPi / 2.0, 6);
                for (double phi : {0.0, 1.234, 4.5}) {
                    const auto split = schemes::run_scheme2_exact(xi, eta, phi, 6);
                    for (int p = 0; p < 4; ++p)
                        worst = std::max(worst,
                                         std::abs(split.conditional[p] - fixed.conditional[p]));
                }
            }
        }
        checks.push_back(deviation_check("scheme2_equals_scheme1_at_pi_half", worst, opt.tol_exact));
    }

    // Scheme 3 coherent components reduce to scheme 1 regardless of |alpha|.
    {
        double worst = 0.0;
        for (double mag : {std::sqrt(2.0), 2.0, 4.0}) {
            const int cutoff = mag > 3.0 ? 60 : 24;
            const double phi_a = 0.9, phi_b = 2.2;
            const auto s3 = schemes::run_scheme3_exact(
                0.8, 0.1, schemes::ReferenceSpec::coherent(mag * std::polar(1.0, phi_a), cutoff),
                schemes::ReferenceSpec::coherent(mag * std::polar(1.0, phi_b), cutoff));
            const auto s1 = schemes::run_scheme1_exact(0.8, 0.1, phi_a, phi_b, cutoff);
            for (int p = 0; p < 4; ++p)
                worst = std::max(worst, std::abs(s3.conditional[p] - s1.conditional[p]));
        }
        checks.push_back(deviation_check("scheme3_coherent_reduction", worst, opt.tol_exact));
    }

    // Remainder-readout adjudication: the simulated ratio follows the derived
    // cos(dphi + pi/2) (no factor 2), and the simulated intensities carry
    // twice the printed per-port values.
    {
        double worst_ratio = 0.0;
        double worst_paper_ratio = 0.0;
        double worst_intensity_2x = 0.0;
        double worst_intensity_printed = 0.0;
        for (double mag : {std::sqrt(2.0), 2.0}) {
            const int cutoff = 40;
            for (int k = 0; k < 9; ++k) {
                const double dphi = 0.2 + 2.0 * kPi * k / 9.0;
                const auto res = schemes::run_scheme3_exact(
                    0.5, 0.2, schemes::ReferenceSpec::coherent(mag, cutoff),
                    schemes::ReferenceSpec::coherent(mag * std::polar(1.0, dphi), cutoff));
                const auto readout =
                    schemes::measure_remainder_phase(res.components[0].remainder_for_pattern[0]);
                const auto printed = analytic::scheme3_remainder_intensities(dphi, mag);
                const double c = std::cos(dphi + kPi / 2.0);
                worst_ratio = std::max(worst_ratio, std::abs(readout.ratio() - c));
                worst_paper_ratio =
                    std::max(worst_paper_ratio, std::abs(readout.ratio() - 2.0 * c));
                worst_intensity_2x =
                    std::max(worst_intensity_2x, max_abs(readout.n15 - 2.0 * printed.n15,
                                                         readout.n16 - 2.0 * printed.n16));
                worst_intensity_printed =
                    std::max(worst_intensity_printed,
                             max_abs(readout.n15 - printed.n15, readout.n16 - printed.n16));
            }
        }
        checks.push_back(deviation_check("remainder_ratio_derived_form", worst_ratio,
                                         opt.tol_exact,
                                         "ratio = cos(dphi+pi/2); printed factor-2 form deviates "
                                         "by up to " + std::to_string(worst_paper_ratio)));
        std::ostringstream note;
        note << "simulated intensities are twice the printed per-port values (printed-form "
                "deviation up to "
             << worst_intensity_printed << ")";
        checks.push_back(deviation_check("remainder_intensities_twice_printed", worst_intensity_2x,
                                         opt.tol_exact, note.str()));
    }

    // Phase-averaged coherent references equal their photon-number mixture.
    {
        const double mag = std::sqrt(2.0);
        const int cutoff = 16;
        schemes::Scheme3Options opts;
        opts.quadrature_points = opt.quadrature_points;
        const auto averaged = schemes::run_scheme3_exact(
            0.8, 0.1, schemes::ReferenceSpec::phase_averaged(mag, cutoff),
            schemes::ReferenceSpec::phase_averaged(mag, cutoff), opts);

        std::vector<double> weights(cutoff + 1);
        double w = std::exp(-mag * mag);
        for (int n = 0; n <= cutoff; ++n) {
            weights[n] = w;
            w *= mag * mag / (n + 1);
        }
        const double sum = [&] {
            double s = 0.0;
            for (double v : weights) s += v;
            return s;
        }();
        for (double& v : weights) v /= sum;
        auto mixture = schemes::ReferenceSpec::number_mixture(weights);
        const auto mixed = schemes::run_scheme3_exact(0.8, 0.1, mixture, mixture);

        double worst = std::abs(averaged.acceptance - mixed.acceptance);
        const auto da = schemes::joint_outcome_distribution(averaged);
        const auto db = schemes::joint_outcome_distribution(mixed);
        auto all_keys = da;
        for (const auto& [k, v] : db) all_keys.try_emplace(k, 0.0);
        for (const auto& [k, unused] : all_keys) {
            const double va = da.count(k) ? da.at(k) : 0.0;
            const double vb = db.count(k) ? db.at(k) : 0.0;
            worst = std::max(worst, std::abs(va - vb));
        }
        checks.push_back(
            deviation_check("representation_equivalence", worst, opt.tol_quadrature));
    }

    // Monte Carlo washout: scheme 1 with uniform random phases averages to
    // S = sqrt(2) at the optimal axes.
    {
        auto cfg = experiment::ExperimentConfig::defaults_for_scheme(1);
        cfg.shots = opt.mc_shots;
        cfg.seed = opt.seed;
        const auto records = experiment::run_chsh_experiment(cfg);
        const auto [s, se] = experiment::phase_average_estimate(records);
        const double z = std::abs(s - std::sqrt(2.0)) / se;
        checks.push_back(deviation_check("mc_scheme1_washout_3sigma", z, 3.0,
                                         "S = " + std::to_string(s) + " +- " + std::to_string(se)));
    }

    // Monte Carlo scheme 2: violation on every run, S = 2*sqrt(2).
    {
        auto cfg = experiment::ExperimentConfig::defaults_for_scheme(2);
        cfg.shots = opt.mc_shots;
        cfg.seed = opt.seed + 1;
        const auto records = experiment::run_chsh_experiment(cfg);
        const auto [s, se] = experiment::phase_average_estimate(records);
        const double z = std::abs(s - analytic::kTwoSqrt2) / se;
        checks.push_back(deviation_check("mc_scheme2_max_violation_3sigma", z, 3.0,
                                         "S = " + std::to_string(s) + " +- " + std::to_string(se)));
    }

    // Tsirelson bound and the location of the optimum on a dense grid.
    {
        double worst = 0.0;
        bool argmax_ok = true;
        for (int k = 0; k < 64; ++k) {
            const double dphi = 2.0 * kPi * k / 64;
            double best = -1.0, best_x = 0.0;
            for (int i = 0; i < 720; ++i) {
                const double x = 2.0 * kPi * i / 720;
                const double s = analytic::s_scheme1(x, dphi);
                worst = std::max(worst, s - analytic::kTwoSqrt2);
                if (s > best) {
                    best = s;
                    best_x = x;
                }
            }
            if (best > 1e-9) {
                const double dist = std::abs(std::remainder(best_x - 3.0 * kPi / 4.0, 2.0 * kPi));
                if (dist > 2.0 * kPi / 720 + 1e-12) argmax_ok = false;
            }
        }
        checks.push_back(deviation_check("tsirelson_bound_grid", std::max(worst, 0.0), 1e-12));
        checks.push_back(
            {"argmax_at_three_quarter_pi", argmax_ok ? 0.0 : 1.0, 0.5, argmax_ok, ""});
    }

    return checks;
}

}  // namespace spnl::verify
