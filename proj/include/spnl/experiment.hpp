#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "spnl/schemes.hpp"

// Shot-level Monte Carlo CHSH protocol: random per-shot reference parameters,
// random measurement settings, Born-rule outcome sampling, delayed remainder
// readout, and binned correlation/S estimation.
//
// Determinism contract: shot i draws from an mt19937_64 seeded with
// splitmix64(master_seed XOR i); uniforms are (next() >> 11) * 2^-53. Draw
// order per shot: Alice's reference parameter, Bob's reference parameter,
// Alice's setting, Bob's setting, acceptance, pattern, readout. Results are
// therefore identical for any thread count.

namespace spnl::experiment {

enum class ReadoutMode { kDeterministic, kSampled };
enum class BinVariable { kCos, kDeltaPhi };
// Mapping from the remainder ratio to c = cos(dphi + pi/2). kPaperFactor2
// applies the printed factor-2 variant for side-by-side comparison.
enum class RatioConvention { kDerived, kPaperFactor2 };

struct ExperimentConfig {
    int scheme = 1;
    double xi = 3.0 * 3.14159265358979323846 / 4.0;
    double eta = 0.0;
    // Scheme 1: per-reference amplitude magnitude. Scheme 2: source amplitude
    // entering the reference splitter.
    double alpha_mag = 1.0;
    schemes::ReferenceSpec ref_a = schemes::ReferenceSpec::phase_averaged(std::sqrt(2.0));
    schemes::ReferenceSpec ref_b = schemes::ReferenceSpec::phase_averaged(std::sqrt(2.0));
    long long shots = 100000;
    int bins = 16;
    std::uint64_t seed = 1;
    ReadoutMode readout = ReadoutMode::kDeterministic;
    RatioConvention ratio_convention = RatioConvention::kDerived;
    BinVariable bin_variable = BinVariable::kCos;
    int cutoff = 8;
    int threads = 1;

    static ExperimentConfig defaults_for_scheme(int scheme);
    void validate() const;  // throws std::invalid_argument with an actionable message
};

struct ShotRecord {
    long long index = 0;
    bool alice_primed = false;
    bool bob_primed = false;
    bool accepted = false;
    int alice_sign = 0;  // +1 upper detector (path 4), -1 lower (path 5)
    int bob_sign = 0;    // +1 upper detector (path 6), -1 lower (path 7)
    double n15 = 0.0;    // remainder readout; NaN when absent
    double n16 = 0.0;
    double c_est = 0.0;  // estimated cos(dphi + pi/2); NaN when unavailable
    bool c_valid = false;
};

struct PairStat {
    double e = 0.0;
    double se = 0.0;
    long long n = 0;
};

struct BinnedEstimate {
    double bin_center = 0.0;  // centre in the binning variable
    double c_center = 0.0;    // centre expressed as c
    double delta_phi = 0.0;   // principal-branch phase, asin(-c)
    double mean_c = 0.0;      // empirical mean of c_est inside the bin
    PairStat ab, apb, abp, apbp;
    double s = 0.0;
    double s_err = 0.0;
    long long accepted = 0;
    bool valid = false;  // false when any setting-pair cell is empty
};

struct BinnedEstimates {
    std::vector<BinnedEstimate> bins;
    long long accepted = 0;
    long long unbinnable = 0;  // accepted shots without a phase estimate
};

std::vector<ShotRecord> run_chsh_experiment(const ExperimentConfig& config);

// Partitions accepted records into uniform bins of the chosen variable and
// estimates the four correlations and S per bin. Bins with an empty
// setting-pair cell are flagged invalid, not dropped.
BinnedEstimates bin_and_estimate(std::span<const ShotRecord> records, int bins,
                                 BinVariable variable = BinVariable::kCos);

// Single-bin estimate discarding all phase information (the washout limit).
std::pair<double, double> phase_average_estimate(std::span<const ShotRecord> records);

// Order-insensitive content hash for reproducibility checks.
std::uint64_t records_hash(std::span<const ShotRecord> records);

}  // namespace spnl::experiment
