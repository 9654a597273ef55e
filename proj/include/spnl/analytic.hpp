#pragma once

#include <array>
#include <utility>

// Closed-form probabilities, correlations and CHSH combinations for the three
// interferometric schemes. These serve both as fast evaluators and as oracles
// for the exact simulator.

namespace spnl::analytic {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoSqrt2 = 2.8284271247461903;

// Reduce an angle to [0, 2*pi).
double reduce_angle(double x);

// Detection axis: base angle plus an optional +pi/2 offset selecting the
// orthogonal axis of the same party.
struct MeasurementSetting {
    double base = 0.0;
    bool primed = false;
    double angle() const { return primed ? base + kPi / 2.0 : base; }
};

struct PhaseSample {
    double phi_a = 0.0;
    double phi_b = 0.0;
    double delta() const { return reduce_angle(phi_b - phi_a); }
};

// Conditional probabilities of the four accepted detection patterns on paths
// 4-7, ordered 1010, 0101, 1001, 0110. They sum to one.
struct PatternDistribution {
    double p1010 = 0.0;
    double p0101 = 0.0;
    double p1001 = 0.0;
    double p0110 = 0.0;
    std::array<double, 4> as_array() const { return {p1010, p0101, p1001, p0110}; }
    double sum() const { return p1010 + p0101 + p1001 + p0110; }
};

// The four correlations entering the CHSH combination.
struct CorrelationQuad {
    double e_ab = 0.0;    // E(xi, eta)
    double e_apb = 0.0;   // E(xi + pi/2, eta)
    double e_abp = 0.0;   // E(xi, eta + pi/2)
    double e_apbp = 0.0;  // E(xi + pi/2, eta + pi/2)
};

PatternDistribution scheme1_pattern_probs(double xi, double eta, double delta_phi);

// E(xi, eta) = -sin^2(dphi/2 + pi/4) cos(xi - eta) - cos^2(dphi/2 + pi/4) cos(xi + eta)
double scheme1_correlation(double xi, double eta, double delta_phi);

CorrelationQuad scheme1_correlation_quad(double xi, double eta, double delta_phi);

// |E(xi,eta) + E(xi+pi/2,eta) - E(xi,eta+pi/2) + E(xi+pi/2,eta+pi/2)|
double chsh_s(const CorrelationQuad& q);

// S = |2 sin^2((dphi + pi/2)/2) (sin(xi - eta) - cos(xi - eta))|
double s_scheme1(double xi_minus_eta, double delta_phi);

// Uniform average over dphi: S = |sin(xi - eta) - cos(xi - eta)|
double s_scheme1_phase_averaged(double xi_minus_eta);

// Fixed dphi = pi/2 reference: S = 2 |sin(xi - eta) - cos(xi - eta)|
double s_scheme2(double xi_minus_eta);

// Remainder-port intensity formulas as printed, with the derived ratio.
// Note: the printed per-port intensities undercount the simulated mean photon
// numbers by exactly a factor of two (the two remainder beams carry
// 2(|a|^2 - 1) quanta in total); the ratio is unaffected by the common factor.
struct RemainderIntensities {
    double n15 = 0.0;
    double n16 = 0.0;
    double ratio = 0.0;  // (n16 - n15) / (n16 + n15) = cos(dphi + pi/2)
};
RemainderIntensities scheme3_remainder_intensities(double delta_phi, double alpha_mag);

// Inverts the remainder ratio to c = cos(dphi + pi/2), clamped to [-1, 1].
// Throws std::domain_error when |ratio| > 1 + 1e-6.
double delta_phi_cos_from_ratio(double ratio);

// S depends on dphi only through c = cos(dphi + pi/2); at the optimal axes
// S = 2*sqrt(2) * (1 - c) / 2.
double s_at_optimum_from_cos(double c);

// dphi interval (both ends exclusive) on which S > 2 at the optimal axes:
// (asin(sqrt(2) - 1), pi - asin(sqrt(2) - 1)).
std::pair<double, double> violation_window();

// Principal branch used when mapping a c bin back to a phase for reporting:
// dphi = asin(-c) in [-pi/2, pi/2].
double principal_delta_phi(double c);

}  // namespace spnl::analytic
