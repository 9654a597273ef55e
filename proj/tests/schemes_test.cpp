#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

#include "spnl/analytic.hpp"
#include "spnl/schemes.hpp"

using namespace spnl;
using schemes::ReferenceSpec;

namespace {
constexpr double kPi = 3.14159265358979323846;
const std::complex<double> kI{0.0, 1.0};

double conditional_distance(const std::array<double, 4>& a, const std::array<double, 4>& b) {
    double worst = 0.0;
    for (int i = 0; i < 4; ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}
}  // namespace

TEST_CASE("scheme 1 conditionals match the closed forms on a grid") {
    double worst = 0.0;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            for (int k = 0; k < 8; ++k) {
                const double xi = 0.15 + 2.0 * kPi * i / 5.0;
                const double eta = 0.4 + 2.0 * kPi * j / 5.0;
                const double dphi = 2.0 * kPi * k / 8.0;
                const auto sim = schemes::run_scheme1_exact(xi, eta, 0.9, 0.9 + dphi, 3);
                const auto ana = analytic::scheme1_pattern_probs(xi, eta, dphi).as_array();
                worst = std::max(worst, conditional_distance(sim.conditional, ana));
                CHECK(sim.acceptance > 0.0);
                CHECK(sim.acceptance <= 1.0);
            }
    CHECK(worst < 1e-10);
}

TEST_CASE("scheme 1 reaches S = 2 sqrt 2 at the optimum") {
    analytic::CorrelationQuad quad;
    double* slots[4] = {&quad.e_ab, &quad.e_apb, &quad.e_abp, &quad.e_apbp};
    const bool primed_a[4] = {false, true, false, true};
    const bool primed_b[4] = {false, false, true, true};
    for (int i = 0; i < 4; ++i) {
        const double xi = 3.0 * kPi / 4.0 + (primed_a[i] ? kPi / 2.0 : 0.0);
        const double eta = primed_b[i] ? kPi / 2.0 : 0.0;
        const auto r = schemes::run_scheme1_exact(xi, eta, 0.0, kPi / 2.0, 4);
        *slots[i] = r.conditional[0] + r.conditional[1] - r.conditional[2] - r.conditional[3];
    }
    CHECK(std::abs(analytic::chsh_s(quad) - analytic::kTwoSqrt2) < 1e-9);
}

TEST_CASE("scheme 1 landmark: P(1010) vanishes at xi = eta = 0, dphi = pi/2") {
    const auto r = schemes::run_scheme1_exact(0.0, 0.0, 0.3, 0.3 + kPi / 2.0, 4);
    CHECK(r.conditional[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.conditional[2] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("scheme 1 depends only on the phase difference") {
    const auto a = schemes::run_scheme1_exact(0.7, 1.9, 0.2, 1.5, 4);
    const auto b = schemes::run_scheme1_exact(0.7, 1.9, 0.2 + 0.9, 1.5 + 0.9, 4);
    CHECK(conditional_distance(a.conditional, b.conditional) < 1e-12);
    CHECK(std::abs(a.acceptance - b.acceptance) < 1e-12);
}

TEST_CASE("scheme 2 equals scheme 1 at the pinned phase difference") {
    for (double xi : {0.0, 0.8, 2.3})
        for (double eta : {0.25, 1.7}) {
            const auto fixed = schemes::run_scheme1_exact(xi, eta, 0.0, kPi / 2.0, 5);
            const auto split = schemes::run_scheme2_exact(xi, eta, 0.64, 5);
            CHECK(conditional_distance(fixed.conditional, split.conditional) < 1e-10);
        }
}

TEST_CASE("scheme 2 is independent of the source phase") {
    const auto a = schemes::run_scheme2_exact(0.9, 0.2, 0.0, 5);
    const auto b = schemes::run_scheme2_exact(0.9, 0.2, 1.234, 5);
    CHECK(conditional_distance(a.conditional, b.conditional) < 1e-12);
    CHECK(std::abs(a.acceptance - b.acceptance) < 1e-12);

    // averaging over a phase grid changes nothing
    std::array<double, 4> averaged{};
    const int K = 8;
    for (int k = 0; k < K; ++k) {
        const auto r = schemes::run_scheme2_exact(0.9, 0.2, 2.0 * kPi * k / K, 5);
        for (int p = 0; p < 4; ++p) averaged[p] += r.conditional[p] / K;
    }
    CHECK(conditional_distance(averaged, a.conditional) < 1e-12);
}

TEST_CASE("scheme 3 coherent components reduce to scheme 1") {
    for (double mag : {std::sqrt(2.0), 2.0}) {
        const int cutoff = mag > 1.5 ? 34 : 22;
        const double phi_a = 0.8, phi_b = 2.9;
        const auto s3 = schemes::run_scheme3_exact(
            1.1, 0.3, ReferenceSpec::coherent(mag * std::polar(1.0, phi_a), cutoff),
            ReferenceSpec::coherent(mag * std::polar(1.0, phi_b), cutoff));
        const auto s1 = schemes::run_scheme1_exact(1.1, 0.3, phi_a, phi_b, cutoff);
        CHECK(conditional_distance(s3.conditional, s1.conditional) < 1e-10);
        REQUIRE(s3.components.size() == 1);
        REQUIRE(s3.components[0].remainder_for_pattern.size() == 4);
    }
}

TEST_CASE("skimming splits sqrt(2) references into unit beams") {
    const double mag = std::sqrt(2.0);
    const auto r = schemes::run_scheme3_exact(0.5, 0.1, ReferenceSpec::coherent(mag, 24),
                                              ReferenceSpec::coherent(mag * kI, 24));
    const auto& rem = r.components[0].remainder_for_pattern[0];
    CHECK(fock::mean_occupation(rem, {11}) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fock::mean_occupation(rem, {14}) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("remainder readout means and the ratio adjudication") {
    const double mag = std::sqrt(2.0);
    auto run = [&](double dphi) {
        const auto r = schemes::run_scheme3_exact(
            0.5, 0.1, ReferenceSpec::coherent(mag, 30),
            ReferenceSpec::coherent(mag * std::polar(1.0, dphi), 30));
        return schemes::measure_remainder_phase(r.components[0].remainder_for_pattern[0]);
    };

    // dphi = pi/2: both remainder quanta exit port 15 (twice the printed value)
    auto at_max = run(kPi / 2.0);
    CHECK(at_max.n15 == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(at_max.n16 == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(at_max.ratio() == doctest::Approx(-1.0).epsilon(1e-10));

    auto at_min = run(3.0 * kPi / 2.0);
    CHECK(at_min.n15 == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(at_min.n16 == doctest::Approx(2.0).epsilon(1e-10));

    for (double dphi : {0.3, 1.1, 2.6, 4.0, 5.5}) {
        const auto readout = run(dphi);
        const auto printed = analytic::scheme3_remainder_intensities(dphi, mag);
        // simulated intensities are exactly twice the printed forms
        CHECK(readout.n15 == doctest::Approx(2.0 * printed.n15).epsilon(1e-9));
        CHECK(readout.n16 == doctest::Approx(2.0 * printed.n16).epsilon(1e-9));
        CHECK(readout.total() == doctest::Approx(2.0 * (mag * mag - 1.0)).epsilon(1e-9));
        // the ratio follows cos(dphi + pi/2) with no factor 2
        CHECK(readout.ratio() == doctest::Approx(std::cos(dphi + kPi / 2.0)).epsilon(1e-10));
    }
}

TEST_CASE("phase-averaged references equal their photon-number mixture") {
    const double mag = 1.2;
    const int cutoff = 14;
    schemes::Scheme3Options opts;
    opts.quadrature_points = 32;  // exceeds the max total occupation, so no wraparound
    const auto averaged =
        schemes::run_scheme3_exact(0.8, 0.1, ReferenceSpec::phase_averaged(mag, cutoff),
                                   ReferenceSpec::phase_averaged(mag, cutoff), opts);

    std::vector<double> weights(cutoff + 1);
    double w = std::exp(-mag * mag);
    double sum = 0.0;
    for (int n = 0; n <= cutoff; ++n) {
        weights[n] = w;
        sum += w;
        w *= mag * mag / (n + 1);
    }
    for (double& v : weights) v /= sum;
    const auto mixture = ReferenceSpec::number_mixture(weights);
    const auto mixed = schemes::run_scheme3_exact(0.8, 0.1, mixture, mixture);

    CHECK(std::abs(averaged.acceptance - mixed.acceptance) < 1e-8);
    CHECK(conditional_distance(averaged.conditional, mixed.conditional) < 1e-8);

    const auto da = schemes::joint_outcome_distribution(averaged);
    const auto db = schemes::joint_outcome_distribution(mixed);
    double worst = 0.0;
    for (const auto& [k, v] : da)
        worst = std::max(worst, std::abs(v - (db.count(k) ? db.at(k) : 0.0)));
    for (const auto& [k, v] : db)
        worst = std::max(worst, std::abs(v - (da.count(k) ? da.at(k) : 0.0)));
    CHECK(worst < 1e-8);
}

TEST_CASE("number references carry exactly N_a + N_b - 1 remainder quanta") {
    const auto r = schemes::run_scheme3_exact(3.0 * kPi / 4.0, 0.0, ReferenceSpec::number(4),
                                              ReferenceSpec::number(4));
    CHECK(r.acceptance > 0.0);
    for (int p = 0; p < 4; ++p) {
        const auto& rem = r.components[0].remainder_for_pattern[p];
        REQUIRE(!rem.empty());
        const double total = fock::mean_occupation(rem, {11}) + fock::mean_occupation(rem, {14});
        CHECK(total == doctest::Approx(7.0).epsilon(1e-12));
        const auto readout = schemes::measure_remainder_phase(rem);
        CHECK(readout.total() == doctest::Approx(7.0).epsilon(1e-12));

        std::mt19937_64 rng(42);
        for (int i = 0; i < 20; ++i) {
            const auto [n15, n16] = schemes::sample_remainder_counts(rem, rng);
            CHECK(n15 + n16 == 7);
        }
    }
}

TEST_CASE("number references use the 1/sqrt(N) skim") {
    const auto comps = schemes::reference_components(ReferenceSpec::number(9), 1);
    REQUIRE(comps.size() == 1);
    CHECK(comps[0].second.skim_transmittivity == doctest::Approx(1.0 / 3.0));
    const auto r =
        schemes::run_scheme3_exact(0.4, 0.2, ReferenceSpec::number(9), ReferenceSpec::number(9));
    const auto& rem = r.components[0].remainder_for_pattern[0];
    const double total = fock::mean_occupation(rem, {11}) + fock::mean_occupation(rem, {14});
    CHECK(total == doctest::Approx(17.0).epsilon(1e-12));
}

TEST_CASE("mixed reference families share one circuit") {
    const auto mixed = schemes::run_scheme3_exact(0.7, 0.2,
                                                  ReferenceSpec::coherent(std::sqrt(2.0), 20),
                                                  ReferenceSpec::number(4));
    CHECK(mixed.acceptance > 0.0);
    CHECK(mixed.acceptance < 1.0);
    double sum = 0.0;
    for (double p : mixed.conditional) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    // the coherent remainder stays a mean-one product factor even through the
    // joint computation; the number remainder loses part of a photon to the
    // detectors
    for (int p = 0; p < 4; ++p) {
        const auto& rem = mixed.components[0].remainder_for_pattern[p];
        CHECK(fock::mean_occupation(rem, {11}) == doctest::Approx(1.0).epsilon(1e-9));
        const double n14 = fock::mean_occupation(rem, {14});
        CHECK(n14 > 3.0);
        CHECK(n14 < 4.0);
    }
}

TEST_CASE("reference spec validation") {
    CHECK_THROWS_AS(ReferenceSpec::phase_averaged(0.5, 8).validate(true), std::invalid_argument);
    CHECK_NOTHROW(ReferenceSpec::phase_averaged(1.0, 8).validate(true));
    CHECK_THROWS_AS(ReferenceSpec::number(0).validate(true), std::invalid_argument);
    CHECK_THROWS_AS(ReferenceSpec::number_mixture({0.5, 0.4}).validate(false),
                    std::invalid_argument);
    CHECK_THROWS_AS(ReferenceSpec::number_mixture({0.5, -0.5, 1.0}).validate(false),
                    std::invalid_argument);
    // mean below one cannot be skimmed
    CHECK_THROWS_AS(ReferenceSpec::number_mixture({0.5, 0.5}).validate(true),
                    std::invalid_argument);
    CHECK_NOTHROW(ReferenceSpec::number_mixture({0.25, 0.25, 0.5}).validate(true));
    CHECK_THROWS_AS(schemes::run_scheme1_exact(0.0, 0.0, 0.0, 0.0, 1), std::invalid_argument);
}

TEST_CASE("sampled readout sharpens as the reference grows") {
    // shot-noise scaling: the spread of the sampled ratio shrinks like
    // 1/sqrt(2(|alpha|^2 - 1))
    const double dphi = 0.8;
    const double c = std::cos(dphi + kPi / 2.0);
    std::mt19937_64 rng(1357);
    double spread[2];
    int idx = 0;
    for (double mag : {2.0, 4.0}) {
        const int cutoff = mag > 3.0 ? 60 : 40;
        const auto r = schemes::run_scheme3_exact(
            0.4, 0.1, ReferenceSpec::coherent(mag, cutoff),
            ReferenceSpec::coherent(mag * std::polar(1.0, dphi), cutoff));
        const auto after =
            schemes::remainder_after_readout_splitter(r.components[0].remainder_for_pattern[0]);
        const int a15 = after.mode_axis({15});
        const int a16 = after.mode_axis({16});
        double sum = 0.0, sum2 = 0.0;
        const int trials = 4000;
        for (int t = 0; t < trials; ++t) {
            const auto ket = fock::sample_outcome(after, rng);
            const int total = ket[a15] + ket[a16];
            if (total == 0) continue;
            const double est = double(ket[a16] - ket[a15]) / total;
            sum += est;
            sum2 += est * est;
        }
        const double mean = sum / trials;
        spread[idx++] = std::sqrt(sum2 / trials - mean * mean);
        CHECK(std::abs(mean - c) < 0.05);
        const double predicted = std::sqrt((1.0 - c * c) / (2.0 * (mag * mag - 1.0)));
        CHECK(spread[idx - 1] == doctest::Approx(predicted).epsilon(0.3));
    }
    CHECK(spread[1] < spread[0]);
}

TEST_CASE("pattern-amplitude decomposition equals the full circuit") {
    std::mt19937_64 rng(321);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    for (int trial = 0; trial < 12; ++trial) {
        const double xi = angle(rng), eta = angle(rng);
        const auto model = schemes::scheme1_pattern_amplitudes(xi, eta, 5);
        for (int k = 0; k < 6; ++k) {
            const double phi_a = angle(rng), phi_b = angle(rng);
            const auto direct = schemes::run_scheme1_exact(xi, eta, phi_a, phi_b, 5);
            CHECK(std::abs(model.acceptance(phi_a, phi_b) - direct.acceptance) < 1e-13);
            CHECK(conditional_distance(model.conditional(phi_a, phi_b), direct.conditional) <
                  1e-12);
        }
    }
}

TEST_CASE("deterministic readout means are affine in sin(dphi)") {
    const double mag = std::sqrt(2.0);
    const int cutoff = 16;
    auto remainder_at = [&](double dphi) {
        const double g = std::sqrt(mag * mag - 1.0);
        return fock::tensor(fock::make_coherent({11}, kI * g, cutoff, 0.5),
                            fock::make_coherent({14}, kI * g * std::polar(1.0, dphi), cutoff, 0.5));
    };
    const auto flat = schemes::measure_remainder_phase(remainder_at(0.0));
    const auto tilted = schemes::measure_remainder_phase(remainder_at(kPi / 2.0));
    const double base = flat.n15, coef = tilted.n15 - flat.n15;
    for (double dphi : {0.3, 1.0, 2.4, 3.9, 5.2}) {
        const auto direct = schemes::measure_remainder_phase(remainder_at(dphi));
        CHECK(direct.n15 == doctest::Approx(base + coef * std::sin(dphi)).epsilon(1e-12));
        CHECK(direct.n16 == doctest::Approx(base - coef * std::sin(dphi)).epsilon(1e-12));
    }
}

TEST_CASE("readout edge cases") {
    fock::StateVector empty({{11}, {14}}, 4);
    CHECK_THROWS_AS(schemes::measure_remainder_phase(empty), std::invalid_argument);

    // a unit-amplitude reference leaves no remainder signal
    const auto r = schemes::run_scheme3_exact(0.5, 0.1, ReferenceSpec::coherent(1.0, 16),
                                              ReferenceSpec::coherent(kI, 16));
    const auto readout = schemes::measure_remainder_phase(r.components[0].remainder_for_pattern[0]);
    CHECK(!readout.has_signal());
    CHECK_THROWS_AS(readout.ratio(), std::domain_error);
}
