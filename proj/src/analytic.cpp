#include "spnl/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace spnl::analytic {

double reduce_angle(double x) {
    double r = std::fmod(x, 2.0 * kPi);
    if (r < 0.0) r += 2.0 * kPi;
    return r;
}

PatternDistribution scheme1_pattern_probs(double xi, double eta, double delta_phi) {
    const double cw = std::cos((delta_phi + kPi / 2.0) / 2.0);
    const double sw = std::sin((delta_phi + kPi / 2.0) / 2.0);
    const double c2 = cw * cw;
    const double s2 = sw * sw;
    const double sum_half = std::sin((xi + eta) / 2.0);
    const double dif_half = std::sin((xi - eta) / 2.0);
    const double sum_half_c = std::cos((xi + eta) / 2.0);
    const double dif_half_c = std::cos((xi - eta) / 2.0);

    PatternDistribution d;
    d.p1010 = 0.5 * (sum_half * sum_half * c2 + dif_half * dif_half * s2);
    d.p0101 = d.p1010;
    d.p1001 = 0.5 * (sum_half_c * sum_half_c * c2 + dif_half_c * dif_half_c * s2);
    d.p0110 = d.p1001;
    return d;
}

double scheme1_correlation(double xi, double eta, double delta_phi) {
    const double s2 = std::pow(std::sin(delta_phi / 2.0 + kPi / 4.0), 2);
    const double c2 = std::pow(std::cos(delta_phi / 2.0 + kPi / 4.0), 2);
    return -s2 * std::cos(xi - eta) - c2 * std::cos(xi + eta);
}

CorrelationQuad scheme1_correlation_quad(double xi, double eta, double delta_phi) {
    CorrelationQuad q;
    q.e_ab = scheme1_correlation(xi, eta, delta_phi);
    q.e_apb = scheme1_correlation(xi + kPi / 2.0, eta, delta_phi);
    q.e_abp = scheme1_correlation(xi, eta + kPi / 2.0, delta_phi);
    q.e_apbp = scheme1_correlation(xi + kPi / 2.0, eta + kPi / 2.0, delta_phi);
    return q;
}

double chsh_s(const CorrelationQuad& q) {
    return std::abs(q.e_ab + q.e_apb - q.e_abp + q.e_apbp);
}

double s_scheme1(double xi_minus_eta, double delta_phi) {
    const double sw = std::sin((delta_phi + kPi / 2.0) / 2.0);
    return std::abs(2.0 * sw * sw * (std::sin(xi_minus_eta) - std::cos(xi_minus_eta)));
}

double s_scheme1_phase_averaged(double xi_minus_eta) {
    return std::abs(std::sin(xi_minus_eta) - std::cos(xi_minus_eta));
}

double s_scheme2(double xi_minus_eta) {
    return 2.0 * s_scheme1_phase_averaged(xi_minus_eta);
}

RemainderIntensities scheme3_remainder_intensities(double delta_phi, double alpha_mag) {
    if (alpha_mag < 1.0)
        throw std::domain_error("remainder intensities need |alpha| >= 1 (skimming "
                                "transmittivity 1/|alpha| <= 1)");
    const double excess = alpha_mag * alpha_mag - 1.0;
    const double sw = std::sin((delta_phi + kPi / 2.0) / 2.0);
    const double cw = std::cos((delta_phi + kPi / 2.0) / 2.0);
    RemainderIntensities r;
    r.n15 = excess * sw * sw;
    r.n16 = excess * cw * cw;
    r.ratio = std::cos(delta_phi + kPi / 2.0);
    return r;
}

double delta_phi_cos_from_ratio(double ratio) {
    if (std::abs(ratio) > 1.0 + 1e-6)
        throw std::domain_error("remainder ratio " + std::to_string(ratio) +
                                " lies outside [-1, 1]");
    return std::clamp(ratio, -1.0, 1.0);
}

double s_at_optimum_from_cos(double c) { return kTwoSqrt2 * (1.0 - c) / 2.0; }

std::pair<double, double> violation_window() {
    const double lo = std::asin(std::sqrt(2.0) - 1.0);
    return {lo, kPi - lo};
}

double principal_delta_phi(double c) { return std::asin(std::clamp(-c, -1.0, 1.0)); }

}  // namespace spnl::analytic
