#include "spnl/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>

#include "spnl/analytic.hpp"

namespace spnl::experiment {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

double next_uniform(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

int pick_pattern(const std::array<double, 4>& conditional, double u) {
    double cdf = 0.0;
    for (int p = 0; p < 4; ++p) {
        cdf += conditional[p];
        if (u < cdf) return p;
    }
    return 3;
}

// Mixed-state references are sampled per shot; this resolves one party's draw
// into a pure component.
schemes::RefComponentSpec sample_component(const schemes::ReferenceSpec& spec,
                                           const std::vector<std::pair<double, schemes::RefComponentSpec>>& comps,
                                           std::mt19937_64& rng) {
    if (std::holds_alternative<schemes::PhaseAveragedRef>(spec.family)) {
        const double mag = std::get<schemes::PhaseAveragedRef>(spec.family).alpha_mag;
        const double phi = 2.0 * kPi * next_uniform(rng);
        return {mag * std::polar(1.0, phi), spec.cutoff, spec.skim_transmittivity()};
    }
    if (std::holds_alternative<schemes::NumberMixtureRef>(spec.family)) {
        const double u = next_uniform(rng);
        double cdf = 0.0;
        for (const auto& [w, comp] : comps) {
            cdf += w;
            if (u < cdf) return comp;
        }
        return comps.back().second;
    }
    return comps.front().second;  // pure reference, nothing to draw
}

bool is_number_component(const schemes::RefComponentSpec& c) {
    return std::holds_alternative<int>(c.value);
}

struct CachedComponent {
    schemes::ComponentResult comp;
    std::array<std::optional<schemes::RemainderReadout>, 4> readout;
    std::array<std::optional<fock::StateVector>, 4> after_splitter;
};

// Discrete-component circuits repeat across shots; key = (n_a, n_b, settings).
class ComponentCache {
  public:
    const CachedComponent& get(double xi, double eta, bool ap, bool bp,
                               const schemes::RefComponentSpec& a,
                               const schemes::RefComponentSpec& b, ReadoutMode readout) {
        const std::array<int, 4> key{std::get<int>(a.value), std::get<int>(b.value),
                                     ap ? 1 : 0, bp ? 1 : 0};
        {
            std::lock_guard lock(mutex_);
            if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        }
        CachedComponent entry;
        entry.comp = schemes::run_scheme3_component(xi + (ap ? kPi / 2 : 0.0),
                                                    eta + (bp ? kPi / 2 : 0.0), a, b);
        for (int p = 0; p < 4; ++p) {
            if (entry.comp.remainder_for_pattern.empty()) break;
            const auto& rem = entry.comp.remainder_for_pattern[p];
            if (rem.empty()) continue;
            if (readout == ReadoutMode::kDeterministic)
                entry.readout[p] = schemes::measure_remainder_phase(rem);
            else
                entry.after_splitter[p] = schemes::remainder_after_readout_splitter(rem);
        }
        std::lock_guard lock(mutex_);
        return cache_.emplace(key, std::move(entry)).first->second;
    }

  private:
    std::mutex mutex_;
    std::map<std::array<int, 4>, CachedComponent> cache_;
};

struct PhaseEstimate {
    double n15 = kNaN;
    double n16 = kNaN;
    double c = kNaN;
    bool valid = false;
};

bool is_coherent_family(const schemes::ReferenceSpec& spec) {
    return std::holds_alternative<schemes::CoherentRef>(spec.family) ||
           std::holds_alternative<schemes::PhaseAveragedRef>(spec.family);
}

// Precomputed per-setting-combo evaluators. For coherent references the
// accepted-pattern amplitudes are affine in e^{i phi}, so two circuit runs
// per combo replace one circuit run per shot; the deterministic remainder
// means are likewise affine in sin(dphi). Both identities are exact and
// pinned by tests against the full circuit.
struct ShotModels {
    std::array<std::optional<schemes::CoherentPatternAmplitudes>, 4> coherent;
    std::array<std::optional<schemes::CircuitResult>, 4> fixed;  // scheme 2
    double readout_base = 0.0;
    double readout_coef = 0.0;
    bool has_readout_model = false;
};

ShotModels build_models(const ExperimentConfig& config) {
    ShotModels models;
    const auto combo_angles = [&](int combo) {
        return std::pair{config.xi + (combo & 1 ? kPi / 2.0 : 0.0),
                         config.eta + (combo & 2 ? kPi / 2.0 : 0.0)};
    };
    if (config.scheme == 1) {
        for (int combo = 0; combo < 4; ++combo) {
            const auto [xi, eta] = combo_angles(combo);
            models.coherent[combo] = schemes::scheme1_pattern_amplitudes(xi, eta, config.cutoff);
        }
    } else if (config.scheme == 2) {
        for (int combo = 0; combo < 4; ++combo) {
            const auto [xi, eta] = combo_angles(combo);
            models.fixed[combo] = schemes::run_scheme2_exact(xi, eta, 0.0, config.cutoff);
        }
    } else if (is_coherent_family(config.ref_a) && is_coherent_family(config.ref_b) &&
               config.ref_a.cutoff == config.ref_b.cutoff) {
        for (int combo = 0; combo < 4; ++combo) {
            const auto [xi, eta] = combo_angles(combo);
            models.coherent[combo] =
                schemes::scheme1_pattern_amplitudes(xi, eta, config.ref_a.cutoff);
        }
        if (config.readout == ReadoutMode::kDeterministic) {
            auto remainder_at = [&](double dphi) {
                const double ta = config.ref_a.skim_transmittivity();
                const double tb = config.ref_b.skim_transmittivity();
                const double ga = std::sqrt(std::max(0.0, 1.0 - ta * ta)) *
                                  std::sqrt(config.ref_a.mean_photon_number());
                const double gb = std::sqrt(std::max(0.0, 1.0 - tb * tb)) *
                                  std::sqrt(config.ref_b.mean_photon_number());
                const fock::Complex i{0.0, 1.0};
                return fock::tensor(
                    fock::make_coherent({11}, i * ga, config.ref_a.cutoff, 0.5),
                    fock::make_coherent({14}, i * gb * std::polar(1.0, dphi),
                                        config.ref_b.cutoff, 0.5));
            };
            const auto flat = schemes::measure_remainder_phase(remainder_at(0.0));
            const auto tilted = schemes::measure_remainder_phase(remainder_at(kPi / 2.0));
            models.readout_base = flat.n15;
            models.readout_coef = tilted.n15 - flat.n15;
            models.has_readout_model = true;
        }
    }
    return models;
}

PhaseEstimate estimate_from_counts(double n15, double n16, RatioConvention convention) {
    PhaseEstimate est;
    est.n15 = n15;
    est.n16 = n16;
    const double total = n15 + n16;
    if (total <= 1e-12) return est;
    double ratio = (n16 - n15) / total;
    if (convention == RatioConvention::kPaperFactor2) ratio /= 2.0;
    est.c = std::clamp(ratio, -1.0, 1.0);
    est.valid = true;
    return est;
}

struct PairAccumulator {
    long long same = 0;
    long long diff = 0;
    long long n() const { return same + diff; }
    PairStat stat() const {
        PairStat s;
        s.n = n();
        if (s.n == 0) return s;
        s.e = double(same - diff) / double(s.n);
        s.se = std::sqrt(std::max(1.0 - s.e * s.e, 0.0) / double(s.n));
        return s;
    }
};

void fnv1a(std::uint64_t& h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ull;
    }
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults_for_scheme(int scheme) {
    ExperimentConfig cfg;
    cfg.scheme = scheme;
    switch (scheme) {
        case 1:
            cfg.alpha_mag = 1.0;
            break;
        case 2:
            cfg.alpha_mag = std::sqrt(2.0);
            break;
        case 3:
            cfg.ref_a = schemes::ReferenceSpec::phase_averaged(std::sqrt(2.0), cfg.cutoff);
            cfg.ref_b = schemes::ReferenceSpec::phase_averaged(std::sqrt(2.0), cfg.cutoff);
            break;
        default:
            throw std::invalid_argument("scheme must be 1, 2 or 3");
    }
    return cfg;
}

void ExperimentConfig::validate() const {
    if (scheme < 1 || scheme > 3) throw std::invalid_argument("scheme must be 1, 2 or 3");
    if (shots < 1) throw std::invalid_argument("shots must be >= 1");
    if (bins < 1) throw std::invalid_argument("bins must be >= 1");
    if (cutoff < 2) throw std::invalid_argument("cutoff must be >= 2");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
    if (scheme != 3 && alpha_mag <= 0.0)
        throw std::invalid_argument("reference amplitude must be positive");
    if (scheme == 3) {
        ref_a.validate(true);
        ref_b.validate(true);
    }
}

std::vector<ShotRecord> run_chsh_experiment(const ExperimentConfig& config) {
    config.validate();

    std::vector<std::pair<double, schemes::RefComponentSpec>> comps_a, comps_b;
    if (config.scheme == 3) {
        comps_a = schemes::reference_components(config.ref_a, 1);
        comps_b = schemes::reference_components(config.ref_b, 1);
    }
    const ShotModels models = build_models(config);
    ComponentCache cache;

    std::vector<ShotRecord> records(static_cast<std::size_t>(config.shots));

    auto run_shot = [&](long long i) {
        std::mt19937_64 rng(splitmix64(config.seed ^ static_cast<std::uint64_t>(i)));
        ShotRecord rec;
        rec.index = i;
        rec.n15 = kNaN;
        rec.n16 = kNaN;
        rec.c_est = kNaN;

        std::optional<schemes::RefComponentSpec> comp_a, comp_b;
        double phi_a = 0.0, phi_b = 0.0;
        if (config.scheme == 1) {
            phi_a = 2.0 * kPi * next_uniform(rng);
            phi_b = 2.0 * kPi * next_uniform(rng);
        } else if (config.scheme == 2) {
            phi_a = 2.0 * kPi * next_uniform(rng);
        } else {
            comp_a = sample_component(config.ref_a, comps_a, rng);
            comp_b = sample_component(config.ref_b, comps_b, rng);
        }
        rec.alice_primed = next_uniform(rng) < 0.5;
        rec.bob_primed = next_uniform(rng) < 0.5;
        const double xi = config.xi + (rec.alice_primed ? kPi / 2.0 : 0.0);
        const double eta = config.eta + (rec.bob_primed ? kPi / 2.0 : 0.0);
        const int combo = (rec.alice_primed ? 1 : 0) | (rec.bob_primed ? 2 : 0);

        double acceptance = 0.0;
        std::array<double, 4> conditional{};
        const schemes::ComponentResult* scheme3 = nullptr;
        schemes::ComponentResult owned;
        const CachedComponent* cached = nullptr;
        bool coherent_scheme3 = false;

        if (config.scheme == 1) {
            acceptance = models.coherent[combo]->acceptance(phi_a, phi_b);
            conditional = models.coherent[combo]->conditional(phi_a, phi_b);
        } else if (config.scheme == 2) {
            acceptance = models.fixed[combo]->acceptance;
            conditional = models.fixed[combo]->conditional;
        } else if (models.coherent[combo].has_value() &&
                   !is_number_component(*comp_a) && !is_number_component(*comp_b)) {
            coherent_scheme3 = true;
            phi_a = std::arg(std::get<fock::Complex>(comp_a->value));
            phi_b = std::arg(std::get<fock::Complex>(comp_b->value));
            acceptance = models.coherent[combo]->acceptance(phi_a, phi_b);
            conditional = models.coherent[combo]->conditional(phi_a, phi_b);
        } else {
            if (is_number_component(*comp_a) && is_number_component(*comp_b)) {
                cached = &cache.get(config.xi, config.eta, rec.alice_primed, rec.bob_primed,
                                    *comp_a, *comp_b, config.readout);
                scheme3 = &cached->comp;
            } else {
                owned = schemes::run_scheme3_component(xi, eta, *comp_a, *comp_b);
                scheme3 = &owned;
            }
            acceptance = scheme3->acceptance;
            conditional = scheme3->conditional;
        }

        rec.accepted = next_uniform(rng) < acceptance;
        if (!rec.accepted) return rec;

        const int pattern = pick_pattern(conditional, next_uniform(rng));
        rec.alice_sign = schemes::kPatternSigns[pattern][0];
        rec.bob_sign = schemes::kPatternSigns[pattern][1];

        if (config.scheme == 2) {
            // The reference splitter pins dphi = pi/2, hence c = -1.
            rec.c_est = -1.0;
            rec.c_valid = true;
        } else if (config.scheme == 3) {
            PhaseEstimate est;
            if (coherent_scheme3 && models.has_readout_model) {
                const double s = std::sin(phi_b - phi_a);
                est = estimate_from_counts(models.readout_base + models.readout_coef * s,
                                           models.readout_base - models.readout_coef * s,
                                           config.ratio_convention);
            } else {
                if (coherent_scheme3) {
                    // sampled readout draws from the remainder state itself
                    owned = schemes::run_scheme3_component(xi, eta, *comp_a, *comp_b);
                    scheme3 = &owned;
                }
                if (config.readout == ReadoutMode::kDeterministic) {
                    if (cached && cached->readout[pattern]) {
                        est = estimate_from_counts(cached->readout[pattern]->n15,
                                                   cached->readout[pattern]->n16,
                                                   config.ratio_convention);
                    } else if (!cached && !scheme3->remainder_for_pattern[pattern].empty()) {
                        const auto readout = schemes::measure_remainder_phase(
                            scheme3->remainder_for_pattern[pattern]);
                        est = estimate_from_counts(readout.n15, readout.n16,
                                                   config.ratio_convention);
                    }
                } else {
                    std::pair<int, int> counts{0, 0};
                    bool have = false;
                    if (cached && cached->after_splitter[pattern]) {
                        const auto& after = *cached->after_splitter[pattern];
                        const auto ket = fock::sample_outcome(after, rng);
                        counts = {ket[after.mode_axis({15})], ket[after.mode_axis({16})]};
                        have = true;
                    } else if (!cached && !scheme3->remainder_for_pattern[pattern].empty()) {
                        counts = schemes::sample_remainder_counts(
                            scheme3->remainder_for_pattern[pattern], rng);
                        have = true;
                    }
                    if (have)
                        est = estimate_from_counts(counts.first, counts.second,
                                                   config.ratio_convention);
                }
            }
            rec.n15 = est.n15;
            rec.n16 = est.n16;
            rec.c_est = est.c;
            rec.c_valid = est.valid;
        }
        return rec;
    };

    if (config.threads <= 1) {
        for (long long i = 0; i < config.shots; ++i) records[i] = run_shot(i);
    } else {
        const int nthreads = std::min<long long>(config.threads, config.shots);
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int t = 0; t < nthreads; ++t) {
            pool.emplace_back([&, t] {
                for (long long i = t; i < config.shots; i += nthreads) records[i] = run_shot(i);
            });
        }
        for (auto& th : pool) th.join();
    }
    return records;
}

BinnedEstimates bin_and_estimate(std::span<const ShotRecord> records, int bins,
                                 BinVariable variable) {
    if (bins < 1) throw std::invalid_argument("bins must be >= 1");

    struct BinAccumulator {
        PairAccumulator pairs[2][2];
        double c_sum = 0.0;
        long long c_n = 0;
    };
    std::vector<BinAccumulator> acc(bins);
    BinnedEstimates out;

    const double lo = variable == BinVariable::kCos ? -1.0 : -kPi / 2.0;
    const double hi = variable == BinVariable::kCos ? 1.0 : kPi / 2.0;

    for (const auto& rec : records) {
        if (!rec.accepted) continue;
        ++out.accepted;
        int index = 0;
        if (bins > 1) {
            if (!rec.c_valid) {
                ++out.unbinnable;
                continue;
            }
            const double value = variable == BinVariable::kCos
                                     ? rec.c_est
                                     : analytic::principal_delta_phi(rec.c_est);
            index = std::clamp(static_cast<int>((value - lo) / (hi - lo) * bins), 0, bins - 1);
        }
        auto& bin = acc[index];
        auto& pair = bin.pairs[rec.alice_primed ? 1 : 0][rec.bob_primed ? 1 : 0];
        if (rec.alice_sign * rec.bob_sign > 0)
            ++pair.same;
        else
            ++pair.diff;
        if (rec.c_valid) {
            bin.c_sum += rec.c_est;
            ++bin.c_n;
        }
    }
    if (out.accepted == 0) throw std::domain_error("no accepted shots; nothing to estimate");
    if (bins > 1 && out.accepted == out.unbinnable)
        throw std::domain_error(
            "no accepted shot carries a phase estimate; bin with bins=1 or use a scheme with "
            "remainder readout");

    out.bins.reserve(bins);
    for (int b = 0; b < bins; ++b) {
        BinnedEstimate est;
        est.bin_center = lo + (b + 0.5) * (hi - lo) / bins;
        est.c_center = variable == BinVariable::kCos ? est.bin_center : -std::sin(est.bin_center);
        est.delta_phi = variable == BinVariable::kCos ? analytic::principal_delta_phi(est.c_center)
                                                      : est.bin_center;
        est.mean_c = acc[b].c_n > 0 ? acc[b].c_sum / double(acc[b].c_n) : kNaN;
        est.ab = acc[b].pairs[0][0].stat();
        est.apb = acc[b].pairs[1][0].stat();
        est.abp = acc[b].pairs[0][1].stat();
        est.apbp = acc[b].pairs[1][1].stat();
        est.accepted = est.ab.n + est.apb.n + est.abp.n + est.apbp.n;
        est.valid = est.ab.n > 0 && est.apb.n > 0 && est.abp.n > 0 && est.apbp.n > 0;
        est.s = std::abs(est.ab.e + est.apb.e - est.abp.e + est.apbp.e);
        est.s_err = std::sqrt(est.ab.se * est.ab.se + est.apb.se * est.apb.se +
                              est.abp.se * est.abp.se + est.apbp.se * est.apbp.se);
        out.bins.push_back(est);
    }
    return out;
}

std::pair<double, double> phase_average_estimate(std::span<const ShotRecord> records) {
    const auto single = bin_and_estimate(records, 1);
    return {single.bins[0].s, single.bins[0].s_err};
}

std::uint64_t records_hash(std::span<const ShotRecord> records) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto add_double = [&h](double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        fnv1a(h, &bits, sizeof(bits));
    };
    for (const auto& r : records) {
        fnv1a(h, &r.index, sizeof(r.index));
        const unsigned char flags = (r.alice_primed << 0) | (r.bob_primed << 1) |
                                    (r.accepted << 2) | (r.c_valid << 3);
        fnv1a(h, &flags, sizeof(flags));
        fnv1a(h, &r.alice_sign, sizeof(r.alice_sign));
        fnv1a(h, &r.bob_sign, sizeof(r.bob_sign));
        add_double(r.n15);
        add_double(r.n16);
        add_double(r.c_est);
    }
    return h;
}

}  // namespace spnl::experiment
