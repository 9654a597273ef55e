#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

// Exact multimode bosonic states in a truncated Fock basis, stored sparsely.
// Mode labels follow optical path numbers; amplitudes below the prune
// threshold are dropped after every operation.

namespace spnl::fock {

using Complex = std::complex<double>;

struct ModeId {
    int value = 0;
    friend constexpr auto operator<=>(const ModeId&, const ModeId&) = default;
};

// Occupation numbers, one entry per mode, ordered as StateVector::modes().
using FockKet = std::vector<int>;

// Occupations on a subset of modes (a detection event).
struct OutcomePattern {
    std::vector<std::pair<ModeId, int>> occupations;
};

// Two-mode mixer with mixing angle theta: amplitude reflectivity sin(theta/2),
// transmittivity cos(theta/2). The reflected amplitude picks up a factor +i
// (-i when conjugated, which realises the inverse).
struct BeamSplitterParams {
    double theta = 0.0;
    bool conjugated = false;

    static BeamSplitterParams fifty_fifty() { return {3.14159265358979323846 / 2.0, false}; }
    static BeamSplitterParams from_reflectivity(double r);
    static BeamSplitterParams from_transmittivity(double t);
    BeamSplitterParams inverse() const { return {theta, !conjugated}; }
    double reflectivity() const;
    double transmittivity() const;
};

class StateVector {
  public:
    // At most 8 modes per state; per-mode occupations up to `cutoff` <= 170.
    StateVector(std::vector<ModeId> modes, int cutoff);

    const std::vector<ModeId>& modes() const { return modes_; }
    int cutoff() const { return cutoff_; }
    std::size_t size() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }

    double prune_threshold() const { return prune_; }
    void set_prune_threshold(double t);

    int mode_axis(ModeId m) const;  // throws std::invalid_argument for unknown modes
    bool has_mode(ModeId m) const;

    Complex amplitude(const FockKet& ket) const;  // 0 for absent kets
    void add_term(const FockKet& ket, Complex amp);

    double norm() const;
    StateVector normalized() const;

    // Iteration in unspecified (but per-construction deterministic) order.
    void for_each_term(const std::function<void(const FockKet&, Complex)>& fn) const;
    // Canonical deterministic order (used by sampling and serialisation).
    std::vector<std::pair<FockKet, Complex>> sorted_terms() const;

    static constexpr int kMaxModes = 8;
    static constexpr int kMaxOccupation = 170;

  private:
    std::uint64_t pack(const FockKet& ket) const;
    FockKet unpack(std::uint64_t key) const;
    static int occupation(std::uint64_t key, int axis) {
        return static_cast<int>((key >> (8 * axis)) & 0xffu);
    }
    static std::uint64_t with_occupation(std::uint64_t key, int axis, int n) {
        const std::uint64_t mask = std::uint64_t{0xff} << (8 * axis);
        return (key & ~mask) | (std::uint64_t(n) << (8 * axis));
    }

    std::vector<ModeId> modes_;
    int cutoff_;
    double prune_ = 1e-15;
    std::unordered_map<std::uint64_t, Complex> terms_;

    friend StateVector make_vacuum(const std::vector<ModeId>&, int);
    friend StateVector make_fock(ModeId, int, int);
    friend StateVector make_coherent(ModeId, Complex, int, double);
    friend StateVector tensor(const StateVector&, const StateVector&);
    friend StateVector apply_beam_splitter(const StateVector&, ModeId, ModeId,
                                           const BeamSplitterParams&);
    friend StateVector apply_phase(const StateVector&, ModeId, double);
    friend StateVector rename_mode(const StateVector&, ModeId, ModeId);
    friend StateVector pruned(const StateVector&, double);
    friend double outcome_probability(const StateVector&, const OutcomePattern&);
    friend double mean_occupation(const StateVector&, ModeId);
};

StateVector make_vacuum(const std::vector<ModeId>& modes, int cutoff);
StateVector make_fock(ModeId mode, int n, int cutoff);

// Truncated coherent state, renormalised. Throws std::domain_error when the
// truncated tail weight sum_{n>cutoff} e^{-|a|^2} |a|^{2n}/n! exceeds
// `tail_tolerance`.
StateVector make_coherent(ModeId mode, Complex alpha, int cutoff, double tail_tolerance = 1e-10);

StateVector tensor(const StateVector& a, const StateVector& b);

// Exact n-photon beam-splitter action via binomial expansion of the
// creation-operator substitution. Throws std::domain_error when an output
// occupation would exceed the cutoff with non-negligible amplitude.
StateVector apply_beam_splitter(const StateVector& s, ModeId m1, ModeId m2,
                                const BeamSplitterParams& params);

StateVector apply_phase(const StateVector& s, ModeId mode, double phi);

StateVector rename_mode(const StateVector& s, ModeId from, ModeId to);

// Same state with a different per-mode cutoff (terms must fit the new one).
StateVector with_cutoff(const StateVector& s, int cutoff);

// Drops terms with |amplitude| <= threshold (no renormalisation).
StateVector pruned(const StateVector& s, double threshold);

double outcome_probability(const StateVector& s, const OutcomePattern& pattern);

struct PostselectResult {
    double probability = 0.0;
    std::optional<StateVector> state;  // empty when probability is zero
};

// Projects onto the kets whose occupations on `subset` satisfy `predicate`
// and renormalises. A zero-probability projection is flagged by an empty
// state, never silently normalised.
PostselectResult postselect(const StateVector& s, const std::vector<ModeId>& subset,
                            const std::function<bool(const OutcomePattern&)>& predicate);

// Born-rule sample of a full occupation pattern. Requires |norm - 1| <= 1e-9.
FockKet sample_outcome(const StateVector& s, std::mt19937_64& rng);

double mean_occupation(const StateVector& s, ModeId mode);

}  // namespace spnl::fock
