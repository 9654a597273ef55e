#pragma once

#include <array>
#include <map>
#include <random>
#include <variant>
#include <vector>

#include "spnl/fock.hpp"

// The three interferometric circuits, built from fock primitives. Optical
// path labels follow the figures: the shared single photon travels paths 1-2,
// the references enter the detection beam splitters on paths 3 and 8, the
// detectors sit on paths 4-7, and the skimmed remainder beams (scheme 3)
// travel paths 11 and 14 into the readout splitter feeding paths 15 and 16.

namespace spnl::schemes {

// Accepted two-detector patterns on paths (4,5,6,7), in fixed order.
inline constexpr std::array<std::array<int, 4>, 4> kPatterns{{
    {1, 0, 1, 0}, {0, 1, 0, 1}, {1, 0, 0, 1}, {0, 1, 1, 0}}};
inline constexpr std::array<const char*, 4> kPatternNames{"1010", "0101", "1001", "0110"};
// (Alice sign, Bob sign): upper detector (paths 4, 6) counts as +1.
inline constexpr std::array<std::array<int, 2>, 4> kPatternSigns{{
    {+1, +1}, {-1, -1}, {+1, -1}, {-1, +1}}};

struct CoherentRef {
    fock::Complex alpha;  // fixed amplitude and phase
};
struct PhaseAveragedRef {
    double alpha_mag = 0.0;  // uniform phase mixture of |alpha_mag e^{i phi}>
};
struct NumberRef {
    int n = 0;
};
struct NumberMixtureRef {
    std::vector<double> weights;  // P(n), indexed by n, summing to one
};

struct ReferenceSpec {
    std::variant<CoherentRef, PhaseAveragedRef, NumberRef, NumberMixtureRef> family;
    int cutoff = 8;  // Fock truncation of this reference

    static ReferenceSpec coherent(fock::Complex alpha, int cutoff = 8);
    static ReferenceSpec phase_averaged(double alpha_mag, int cutoff = 8);
    static ReferenceSpec number(int n);
    static ReferenceSpec number_mixture(std::vector<double> weights);

    double mean_photon_number() const;
    // Skimming-splitter amplitude transmittivity, 1/sqrt(mean photon number).
    // For number mixtures this is set from the mixture mean, one physical
    // splitter setting for all components.
    double skim_transmittivity() const;
    // Throws std::invalid_argument on malformed specs; `for_skimming` also
    // demands mean photon number >= 1.
    void validate(bool for_skimming) const;
};

// One pure component of a (possibly mixed) reference.
struct RefComponentSpec {
    std::variant<fock::Complex, int> value;  // coherent amplitude or photon number
    int cutoff = 8;                          // coherent truncation; unused for number
    double skim_transmittivity = 1.0;
};

// Weighted decomposition of a reference into pure components. Phase-averaged
// references expand into `quadrature_points` equally weighted phases.
std::vector<std::pair<double, RefComponentSpec>> reference_components(
    const ReferenceSpec& spec, int quadrature_points);

struct ComponentResult {
    double weight = 1.0;
    double acceptance = 0.0;
    std::array<double, 4> conditional{};  // pattern distribution given acceptance
    // Scheme 3 only: remainder state on paths {11, 14} given each accepted
    // pattern (all four equal for coherent components).
    std::vector<fock::StateVector> remainder_for_pattern;
};

struct CircuitResult {
    std::array<double, 4> conditional{};  // mixture-averaged
    double acceptance = 0.0;
    std::vector<ComponentResult> components;
};

// Scheme 1: independently phased coherent references on paths 3 and 8.
// `cutoff` truncates each reference; the detection statistics conditioned on
// acceptance are truncation-independent.
CircuitResult run_scheme1_exact(double xi, double eta, double phi_a, double phi_b, int cutoff);

// Scheme 2: both references derive from one coherent state |sqrt(2) e^{i phi}>
// split 50:50, pinning the reference phase difference to pi/2.
CircuitResult run_scheme2_exact(double xi, double eta, double phi, int cutoff);

struct Scheme3Options {
    int quadrature_points = 64;  // per phase-averaged reference
};

// Scheme 3: independent references skimmed at transmittivity 1/sqrt(mean n);
// remainder beams are kept for the delayed phase readout.
CircuitResult run_scheme3_exact(double xi, double eta, const ReferenceSpec& ref_a,
                                const ReferenceSpec& ref_b, const Scheme3Options& opts = {});

// One pure scheme-3 component (also the per-shot working unit of the Monte
// Carlo harness).
ComponentResult run_scheme3_component(double xi, double eta, const RefComponentSpec& a,
                                      const RefComponentSpec& b);

// Phase structure of the accepted-pattern amplitudes for unit-amplitude
// coherent references: every accepted pattern consumes exactly one reference
// photon, so A_p(phi_a, phi_b) = u[p] e^{i phi_a} + v[p] e^{i phi_b} exactly.
// Extracted from two circuit evaluations; evaluation per phase pair is O(1).
struct CoherentPatternAmplitudes {
    std::array<fock::Complex, 4> u{}, v{};
    double acceptance(double phi_a, double phi_b) const;
    std::array<double, 4> conditional(double phi_a, double phi_b) const;
};
CoherentPatternAmplitudes scheme1_pattern_amplitudes(double xi, double eta, int cutoff);

// 50:50 readout splitter combining paths 11 and 14 into 15 and 16
// (path 14 transmits into 15).
fock::StateVector remainder_after_readout_splitter(const fock::StateVector& remainder);

struct RemainderReadout {
    double n15 = 0.0;
    double n16 = 0.0;
    double total() const { return n15 + n16; }
    bool has_signal(double eps = 1e-12) const { return total() > eps; }
    double ratio() const;  // (n16 - n15)/(n16 + n15); throws without signal
};

// Deterministic readout: mean occupations of paths 15 and 16.
RemainderReadout measure_remainder_phase(const fock::StateVector& remainder);

// Shot-level readout: one Fock sample of (n15, n16).
std::pair<int, int> sample_remainder_counts(const fock::StateVector& remainder,
                                            std::mt19937_64& rng);

// Accepted-outcome distribution over (pattern index, n15, n16), weighted by
// acceptance; used for cross-representation equivalence checks.
std::map<std::array<int, 3>, double> joint_outcome_distribution(const CircuitResult& result);

}  // namespace spnl::schemes
