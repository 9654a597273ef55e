#include "spnl/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace spnl::schemes {

namespace {

using fock::BeamSplitterParams;
using fock::Complex;
using fock::ModeId;
using fock::StateVector;

constexpr double kPi = 3.14159265358979323846;

constexpr ModeId kPath1{1}, kPath2{2}, kPath3{3}, kPath4{4}, kPath5{5}, kPath6{6}, kPath7{7},
    kPath8{8}, kPath9{9}, kPath10{10}, kPath11{11}, kPath12{12}, kPath13{13}, kPath14{14},
    kPath15{15}, kPath16{16};

// References inside circuit runs accept any truncation that keeps at least
// half the state; tighter guarantees are the caller's cutoff choice.
constexpr double kCircuitTail = 0.5;

StateVector reference_coherent(ModeId mode, Complex alpha, int cutoff) {
    auto s = fock::make_coherent(mode, alpha, cutoff, kCircuitTail);
    return fock::pruned(s, s.prune_threshold());
}

// Single photon split on BS1, references mixed in at BS2 (angle xi) and BS3
// (angle eta). `refs` carries paths 3 and 8 plus any spectator remainder
// paths; the returned state lives on the detector paths 4-7 (+ spectators).
StateVector core_full_state(double xi, double eta, const StateVector& refs) {
    const int cutoff = refs.cutoff() + 1;  // headroom for the extra photon

    auto photon = fock::tensor(fock::make_vacuum({kPath1}, cutoff), fock::make_fock(kPath2, 1, cutoff));
    photon = fock::apply_beam_splitter(photon, kPath1, kPath2, BeamSplitterParams::fifty_fifty());

    auto state = fock::tensor(photon, fock::with_cutoff(refs, cutoff));
    state = fock::apply_beam_splitter(state, kPath1, kPath3, {xi});
    state = fock::rename_mode(state, kPath1, kPath4);
    state = fock::rename_mode(state, kPath3, kPath5);
    state = fock::apply_beam_splitter(state, kPath2, kPath8, {eta});
    state = fock::rename_mode(state, kPath2, kPath6);
    return fock::rename_mode(state, kPath8, kPath7);
}

// Post-selects the core on one particle per party.
ComponentResult run_core(double xi, double eta, const StateVector& refs, bool want_remainders) {
    const StateVector state = core_full_state(xi, eta, refs);
    const std::vector<ModeId> detectors{kPath4, kPath5, kPath6, kPath7};
    auto selected = fock::postselect(state, detectors, [](const fock::OutcomePattern& p) {
        const int alice = p.occupations[0].second + p.occupations[1].second;
        const int bob = p.occupations[2].second + p.occupations[3].second;
        return alice == 1 && bob == 1;
    });

    ComponentResult comp;
    comp.acceptance = selected.probability;
    if (!selected.state) return comp;
    const StateVector& post = *selected.state;

    for (std::size_t p = 0; p < kPatterns.size(); ++p) {
        fock::OutcomePattern pattern;
        for (std::size_t i = 0; i < detectors.size(); ++i)
            pattern.occupations.emplace_back(detectors[i], kPatterns[p][i]);
        comp.conditional[p] = fock::outcome_probability(post, pattern);
    }

    if (want_remainders) {
        const std::array<int, 4> axes{post.mode_axis(kPath4), post.mode_axis(kPath5),
                                      post.mode_axis(kPath6), post.mode_axis(kPath7)};
        const int a11 = post.mode_axis(kPath11);
        const int a14 = post.mode_axis(kPath14);
        for (std::size_t p = 0; p < kPatterns.size(); ++p) {
            StateVector rem({kPath11, kPath14}, post.cutoff());
            post.for_each_term([&](const fock::FockKet& ket, Complex amp) {
                for (int i = 0; i < 4; ++i)
                    if (ket[axes[i]] != kPatterns[p][i]) return;
                rem.add_term({ket[a11], ket[a14]}, amp);
            });
            if (!rem.empty()) rem = rem.normalized();
            comp.remainder_for_pattern.push_back(std::move(rem));
        }
    }
    return comp;
}

StateVector coherent_party_core(ModeId ref_mode, Complex alpha, double skim_t, int cutoff) {
    return reference_coherent(ref_mode, skim_t * alpha, cutoff);
}

StateVector coherent_party_remainder(ModeId rem_mode, Complex alpha, double skim_t, int cutoff) {
    const double r = std::sqrt(std::max(0.0, 1.0 - skim_t * skim_t));
    return reference_coherent(rem_mode, Complex{0.0, 1.0} * r * alpha, cutoff);
}

// Number-state reference skimmed on an explicit splitter; the transmitted
// beam feeds the detection core and the reflected beam is the remainder.
StateVector number_party(int n, double skim_t, ModeId src, ModeId vac, ModeId ref_mode,
                         ModeId rem_mode) {
    const int cutoff = std::max(n, 1);
    auto s = fock::tensor(fock::make_fock(src, n, cutoff), fock::make_vacuum({vac}, cutoff));
    s = fock::apply_beam_splitter(s, src, vac, BeamSplitterParams::from_transmittivity(skim_t));
    s = fock::rename_mode(s, src, ref_mode);
    return fock::rename_mode(s, vac, rem_mode);
}

StateVector party_with_remainder(const RefComponentSpec& spec, ModeId src, ModeId vac,
                                 ModeId ref_mode, ModeId rem_mode) {
    if (const auto* alpha = std::get_if<Complex>(&spec.value)) {
        return fock::tensor(
            coherent_party_core(ref_mode, *alpha, spec.skim_transmittivity, spec.cutoff),
            coherent_party_remainder(rem_mode, *alpha, spec.skim_transmittivity, spec.cutoff));
    }
    return number_party(std::get<int>(spec.value), spec.skim_transmittivity, src, vac, ref_mode,
                        rem_mode);
}

}  // namespace

ReferenceSpec ReferenceSpec::coherent(fock::Complex alpha, int cutoff) {
    return {CoherentRef{alpha}, cutoff};
}

ReferenceSpec ReferenceSpec::phase_averaged(double alpha_mag, int cutoff) {
    return {PhaseAveragedRef{alpha_mag}, cutoff};
}

ReferenceSpec ReferenceSpec::number(int n) { return {NumberRef{n}, std::max(n, 1)}; }

ReferenceSpec ReferenceSpec::number_mixture(std::vector<double> weights) {
    const int cutoff = std::max<int>(static_cast<int>(weights.size()) - 1, 1);
    return {NumberMixtureRef{std::move(weights)}, cutoff};
}

double ReferenceSpec::mean_photon_number() const {
    if (const auto* c = std::get_if<CoherentRef>(&family)) return std::norm(c->alpha);
    if (const auto* p = std::get_if<PhaseAveragedRef>(&family)) return p->alpha_mag * p->alpha_mag;
    if (const auto* n = std::get_if<NumberRef>(&family)) return n->n;
    const auto& w = std::get<NumberMixtureRef>(family).weights;
    double total = 0.0, mean = 0.0;
    for (std::size_t n = 0; n < w.size(); ++n) {
        total += w[n];
        mean += double(n) * w[n];
    }
    return total > 0.0 ? mean / total : 0.0;
}

double ReferenceSpec::skim_transmittivity() const {
    const double mean = mean_photon_number();
    if (mean <= 0.0) throw std::domain_error("skimming needs a reference with particles");
    return std::min(1.0, 1.0 / std::sqrt(mean));
}

void ReferenceSpec::validate(bool for_skimming) const {
    if (cutoff < 1) throw std::invalid_argument("reference cutoff must be >= 1");
    if (const auto* m = std::get_if<NumberMixtureRef>(&family)) {
        if (m->weights.empty()) throw std::invalid_argument("number mixture needs weights");
        double sum = 0.0;
        for (double w : m->weights) {
            if (w < 0.0 || !std::isfinite(w))
                throw std::invalid_argument("number-mixture weights must be nonnegative");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-6)
            throw std::invalid_argument("number-mixture weights must sum to one (got " +
                                        std::to_string(sum) + ")");
        if (static_cast<int>(m->weights.size()) - 1 > cutoff)
            throw std::invalid_argument("number-mixture support exceeds reference cutoff");
    }
    if (const auto* n = std::get_if<NumberRef>(&family)) {
        if (n->n < 0) throw std::invalid_argument("photon number must be nonnegative");
        if (n->n > cutoff) throw std::invalid_argument("number state exceeds reference cutoff");
    }
    if (for_skimming && mean_photon_number() < 1.0)
        throw std::invalid_argument(
            "skimming requires mean photon number >= 1 (transmittivity 1/sqrt(mean) <= 1)");
}

std::vector<std::pair<double, RefComponentSpec>> reference_components(const ReferenceSpec& spec,
                                                                      int quadrature_points) {
    const double skim = spec.skim_transmittivity();
    std::vector<std::pair<double, RefComponentSpec>> out;
    if (const auto* c = std::get_if<CoherentRef>(&spec.family)) {
        out.push_back({1.0, {c->alpha, spec.cutoff, skim}});
        return out;
    }
    if (const auto* p = std::get_if<PhaseAveragedRef>(&spec.family)) {
        if (quadrature_points < 1) throw std::invalid_argument("quadrature needs >= 1 point");
        out.reserve(quadrature_points);
        for (int k = 0; k < quadrature_points; ++k) {
            const double phi = 2.0 * kPi * k / quadrature_points;
            out.push_back({1.0 / quadrature_points,
                           {p->alpha_mag * std::polar(1.0, phi), spec.cutoff, skim}});
        }
        return out;
    }
    if (const auto* n = std::get_if<NumberRef>(&spec.family)) {
        out.push_back({1.0, {n->n, spec.cutoff, skim}});
        return out;
    }
    const auto& weights = std::get<NumberMixtureRef>(spec.family).weights;
    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (std::size_t n = 0; n < weights.size(); ++n)
        if (weights[n] / sum > 1e-15)
            out.push_back({weights[n] / sum, {static_cast<int>(n), spec.cutoff, skim}});
    return out;
}

CircuitResult run_scheme1_exact(double xi, double eta, double phi_a, double phi_b, int cutoff) {
    if (cutoff < 2) throw std::invalid_argument("scheme 1 needs cutoff >= 2");
    auto refs = fock::tensor(reference_coherent(kPath3, std::polar(1.0, phi_a), cutoff),
                             reference_coherent(kPath8, std::polar(1.0, phi_b), cutoff));
    ComponentResult comp = run_core(xi, eta, refs, false);
    if (comp.acceptance <= 0.0)
        throw std::domain_error("scheme 1 post-selection has zero acceptance");
    CircuitResult result;
    result.conditional = comp.conditional;
    result.acceptance = comp.acceptance;
    result.components.push_back(std::move(comp));
    return result;
}

CircuitResult run_scheme2_exact(double xi, double eta, double phi, int cutoff) {
    if (cutoff < 2) throw std::invalid_argument("scheme 2 needs cutoff >= 2");
    const int source_cutoff = std::min(2 * cutoff, StateVector::kMaxOccupation - 1);
    auto refs =
        fock::tensor(reference_coherent(kPath9, std::sqrt(2.0) * std::polar(1.0, phi), source_cutoff),
                     fock::make_vacuum({kPath10}, source_cutoff));
    refs = fock::apply_beam_splitter(refs, kPath9, kPath10, BeamSplitterParams::fifty_fifty());
    refs = fock::rename_mode(refs, kPath9, kPath3);
    refs = fock::rename_mode(refs, kPath10, kPath8);

    ComponentResult comp = run_core(xi, eta, refs, false);
    if (comp.acceptance <= 0.0)
        throw std::domain_error("scheme 2 post-selection has zero acceptance");
    CircuitResult result;
    result.conditional = comp.conditional;
    result.acceptance = comp.acceptance;
    result.components.push_back(std::move(comp));
    return result;
}

double CoherentPatternAmplitudes::acceptance(double phi_a, double phi_b) const {
    const Complex ea = std::polar(1.0, phi_a);
    const Complex eb = std::polar(1.0, phi_b);
    double total = 0.0;
    for (int p = 0; p < 4; ++p) total += std::norm(u[p] * ea + v[p] * eb);
    return total;
}

std::array<double, 4> CoherentPatternAmplitudes::conditional(double phi_a, double phi_b) const {
    const Complex ea = std::polar(1.0, phi_a);
    const Complex eb = std::polar(1.0, phi_b);
    std::array<double, 4> probs{};
    double total = 0.0;
    for (int p = 0; p < 4; ++p) {
        probs[p] = std::norm(u[p] * ea + v[p] * eb);
        total += probs[p];
    }
    for (double& x : probs) x /= total;
    return probs;
}

CoherentPatternAmplitudes scheme1_pattern_amplitudes(double xi, double eta, int cutoff) {
    if (cutoff < 2) throw std::invalid_argument("scheme 1 needs cutoff >= 2");
    auto amplitudes_at = [&](double phi_b) {
        auto refs = fock::tensor(reference_coherent(kPath3, 1.0, cutoff),
                                 reference_coherent(kPath8, std::polar(1.0, phi_b), cutoff));
        const auto state = core_full_state(xi, eta, refs);
        const std::array<int, 4> axes{state.mode_axis(kPath4), state.mode_axis(kPath5),
                                      state.mode_axis(kPath6), state.mode_axis(kPath7)};
        std::array<Complex, 4> amps{};
        fock::FockKet ket(state.modes().size(), 0);
        for (int p = 0; p < 4; ++p) {
            for (int i = 0; i < 4; ++i) ket[axes[i]] = kPatterns[p][i];
            amps[p] = state.amplitude(ket);
        }
        return amps;
    };
    const auto at_zero = amplitudes_at(0.0);
    const auto at_quarter = amplitudes_at(kPi / 2.0);
    CoherentPatternAmplitudes result;
    for (int p = 0; p < 4; ++p) {
        result.v[p] = (at_quarter[p] - at_zero[p]) / Complex{-1.0, 1.0};
        result.u[p] = at_zero[p] - result.v[p];
    }
    return result;
}

ComponentResult run_scheme3_component(double xi, double eta, const RefComponentSpec& a,
                                      const RefComponentSpec& b) {
    const bool both_coherent =
        std::holds_alternative<Complex>(a.value) && std::holds_alternative<Complex>(b.value);
    if (both_coherent) {
        // A splitter maps a coherent state exactly onto a coherent product, so
        // the remainder beams factor out of the detection core.
        const Complex alpha_a = std::get<Complex>(a.value);
        const Complex alpha_b = std::get<Complex>(b.value);
        auto refs =
            fock::tensor(coherent_party_core(kPath3, alpha_a, a.skim_transmittivity, a.cutoff),
                         coherent_party_core(kPath8, alpha_b, b.skim_transmittivity, b.cutoff));
        ComponentResult comp = run_core(xi, eta, refs, false);
        if (comp.acceptance > 0.0) {
            auto rem = fock::tensor(
                coherent_party_remainder(kPath11, alpha_a, a.skim_transmittivity, a.cutoff),
                coherent_party_remainder(kPath14, alpha_b, b.skim_transmittivity, b.cutoff));
            comp.remainder_for_pattern.assign(4, rem);
        }
        return comp;
    }
    auto refs = fock::tensor(party_with_remainder(a, kPath10, kPath9, kPath3, kPath11),
                             party_with_remainder(b, kPath13, kPath12, kPath8, kPath14));
    return run_core(xi, eta, refs, true);
}

CircuitResult run_scheme3_exact(double xi, double eta, const ReferenceSpec& ref_a,
                                const ReferenceSpec& ref_b, const Scheme3Options& opts) {
    ref_a.validate(true);
    ref_b.validate(true);
    const auto comps_a = reference_components(ref_a, opts.quadrature_points);
    const auto comps_b = reference_components(ref_b, opts.quadrature_points);

    CircuitResult result;
    for (const auto& [wa, ca] : comps_a) {
        for (const auto& [wb, cb] : comps_b) {
            ComponentResult comp = run_scheme3_component(xi, eta, ca, cb);
            comp.weight = wa * wb;
            result.acceptance += comp.weight * comp.acceptance;
            for (std::size_t p = 0; p < 4; ++p)
                result.conditional[p] += comp.weight * comp.acceptance * comp.conditional[p];
            result.components.push_back(std::move(comp));
        }
    }
    if (result.acceptance <= 0.0)
        throw std::domain_error("scheme 3 post-selection has zero acceptance");
    for (auto& p : result.conditional) p /= result.acceptance;
    return result;
}

fock::StateVector remainder_after_readout_splitter(const fock::StateVector& remainder) {
    const int widened =
        std::min(2 * remainder.cutoff() + 1, static_cast<int>(StateVector::kMaxOccupation));
    auto s = fock::with_cutoff(remainder, widened);
    s = fock::apply_beam_splitter(s, kPath14, kPath11, BeamSplitterParams::fifty_fifty());
    s = fock::rename_mode(s, kPath14, kPath15);
    return fock::rename_mode(s, kPath11, kPath16);
}

double RemainderReadout::ratio() const {
    if (!has_signal())
        throw std::domain_error("remainder readout carries no particles; ratio undefined");
    return (n16 - n15) / (n16 + n15);
}

RemainderReadout measure_remainder_phase(const fock::StateVector& remainder) {
    if (remainder.empty())
        throw std::invalid_argument("remainder state is empty (pattern with zero probability?)");
    auto s = remainder_after_readout_splitter(remainder);
    RemainderReadout r;
    r.n15 = fock::mean_occupation(s, kPath15);
    r.n16 = fock::mean_occupation(s, kPath16);
    return r;
}

std::pair<int, int> sample_remainder_counts(const fock::StateVector& remainder,
                                            std::mt19937_64& rng) {
    if (remainder.empty())
        throw std::invalid_argument("remainder state is empty (pattern with zero probability?)");
    auto s = remainder_after_readout_splitter(remainder);
    const auto ket = fock::sample_outcome(s, rng);
    return {ket[s.mode_axis(kPath15)], ket[s.mode_axis(kPath16)]};
}

std::map<std::array<int, 3>, double> joint_outcome_distribution(const CircuitResult& result) {
    std::map<std::array<int, 3>, double> dist;
    for (const auto& comp : result.components) {
        if (comp.acceptance <= 0.0 || comp.remainder_for_pattern.empty()) continue;
        for (int p = 0; p < 4; ++p) {
            const double wp = comp.weight * comp.acceptance * comp.conditional[p];
            if (wp <= 0.0) continue;
            const auto& rem = comp.remainder_for_pattern[p];
            if (rem.empty()) continue;
            auto after = remainder_after_readout_splitter(rem);
            const int a15 = after.mode_axis(kPath15);
            const int a16 = after.mode_axis(kPath16);
            after.for_each_term([&](const fock::FockKet& ket, Complex amp) {
                dist[{p, ket[a15], ket[a16]}] += wp * std::norm(amp);
            });
        }
    }
    return dist;
}

}  // namespace spnl::schemes
