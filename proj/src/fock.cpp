#include "spnl/fock.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace spnl::fock {

namespace {

constexpr double kPi = 3.14159265358979323846;

const std::array<double, StateVector::kMaxOccupation + 1>& factorials() {
    static const auto table = [] {
        std::array<double, StateVector::kMaxOccupation + 1> t{};
        t[0] = 1.0;
        for (int n = 1; n <= StateVector::kMaxOccupation; ++n) t[n] = t[n - 1] * n;
        return t;
    }();
    return table;
}

double binomial(int n, int k) {
    const auto& f = factorials();
    return f[n] / (f[k] * f[n - k]);
}

// sqrt(p! q! / (n1! n2!)) with p + q == n1 + n2
double transition_weight(int p, int q, int n1, int n2) {
    const auto& f = factorials();
    return std::sqrt(f[p] / f[n1]) * std::sqrt(f[q] / f[n2]);
}

}  // namespace

BeamSplitterParams BeamSplitterParams::from_reflectivity(double r) {
    if (r < 0.0 || r > 1.0) throw std::invalid_argument("reflectivity must lie in [0,1]");
    return {2.0 * std::asin(r), false};
}

BeamSplitterParams BeamSplitterParams::from_transmittivity(double t) {
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("transmittivity must lie in [0,1]");
    return {2.0 * std::acos(t), false};
}

double BeamSplitterParams::reflectivity() const { return std::sin(theta / 2.0); }
double BeamSplitterParams::transmittivity() const { return std::cos(theta / 2.0); }

StateVector::StateVector(std::vector<ModeId> modes, int cutoff)
    : modes_(std::move(modes)), cutoff_(cutoff) {
    if (modes_.empty()) throw std::invalid_argument("state needs at least one mode");
    if (modes_.size() > kMaxModes)
        throw std::invalid_argument("at most " + std::to_string(kMaxModes) + " modes per state");
    if (cutoff_ < 1 || cutoff_ > kMaxOccupation)
        throw std::invalid_argument("cutoff must lie in [1, " +
                                    std::to_string(kMaxOccupation) + "]");
    for (std::size_t i = 0; i < modes_.size(); ++i)
        for (std::size_t j = i + 1; j < modes_.size(); ++j)
            if (modes_[i] == modes_[j]) throw std::invalid_argument("duplicate mode id");
}

void StateVector::set_prune_threshold(double t) {
    if (t < 0.0) throw std::invalid_argument("prune threshold must be nonnegative");
    prune_ = t;
}

int StateVector::mode_axis(ModeId m) const {
    for (std::size_t i = 0; i < modes_.size(); ++i)
        if (modes_[i] == m) return static_cast<int>(i);
    throw std::invalid_argument("unknown mode " + std::to_string(m.value));
}

bool StateVector::has_mode(ModeId m) const {
    return std::find(modes_.begin(), modes_.end(), m) != modes_.end();
}

std::uint64_t StateVector::pack(const FockKet& ket) const {
    if (ket.size() != modes_.size())
        throw std::invalid_argument("ket length does not match mode count");
    std::uint64_t key = 0;
    for (std::size_t i = 0; i < ket.size(); ++i) {
        if (ket[i] < 0 || ket[i] > cutoff_)
            throw std::invalid_argument("occupation " + std::to_string(ket[i]) +
                                        " outside [0, cutoff=" + std::to_string(cutoff_) + "]");
        key |= std::uint64_t(ket[i]) << (8 * i);
    }
    return key;
}

FockKet StateVector::unpack(std::uint64_t key) const {
    FockKet ket(modes_.size());
    for (std::size_t i = 0; i < modes_.size(); ++i) ket[i] = occupation(key, static_cast<int>(i));
    return ket;
}

Complex StateVector::amplitude(const FockKet& ket) const {
    auto it = terms_.find(pack(ket));
    return it == terms_.end() ? Complex{0.0, 0.0} : it->second;
}

void StateVector::add_term(const FockKet& ket, Complex amp) {
    terms_[pack(ket)] += amp;
}

double StateVector::norm() const {
    double s = 0.0;
    for (const auto& [key, amp] : terms_) s += std::norm(amp);
    return std::sqrt(s);
}

StateVector StateVector::normalized() const {
    const double n = norm();
    if (n == 0.0) throw std::domain_error("cannot normalise the zero state");
    StateVector out = *this;
    for (auto& [key, amp] : out.terms_) amp /= n;
    return out;
}

void StateVector::for_each_term(const std::function<void(const FockKet&, Complex)>& fn) const {
    for (const auto& [key, amp] : terms_) fn(unpack(key), amp);
}

std::vector<std::pair<FockKet, Complex>> StateVector::sorted_terms() const {
    std::vector<std::pair<std::uint64_t, Complex>> keyed(terms_.begin(), terms_.end());
    std::sort(keyed.begin(), keyed.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<FockKet, Complex>> out;
    out.reserve(keyed.size());
    for (const auto& [key, amp] : keyed) out.emplace_back(unpack(key), amp);
    return out;
}

StateVector make_vacuum(const std::vector<ModeId>& modes, int cutoff) {
    StateVector s(modes, cutoff);
    s.terms_.emplace(0, Complex{1.0, 0.0});
    return s;
}

StateVector make_fock(ModeId mode, int n, int cutoff) {
    if (n < 0) throw std::invalid_argument("photon number must be nonnegative");
    if (n > cutoff) throw std::invalid_argument("photon number exceeds cutoff");
    StateVector s({mode}, cutoff);
    s.terms_.emplace(std::uint64_t(n), Complex{1.0, 0.0});
    return s;
}

StateVector make_coherent(ModeId mode, Complex alpha, int cutoff, double tail_tolerance) {
    StateVector s({mode}, cutoff);
    const double mean = std::norm(alpha);
    // Poisson weights e^{-|a|^2} |a|^{2n} / n!, accumulated incrementally.
    double weight = std::exp(-mean);
    double kept = 0.0;
    Complex amp = std::exp(-mean / 2.0);
    for (int n = 0; n <= cutoff; ++n) {
        if (n > 0) {
            weight *= mean / n;
            amp *= alpha / std::sqrt(double(n));
        }
        kept += weight;
        s.terms_.emplace(std::uint64_t(n), amp);
    }
    const double tail = std::max(0.0, 1.0 - kept);
    if (tail >= tail_tolerance)
        throw std::domain_error("coherent-state tail weight " + std::to_string(tail) +
                                " exceeds tolerance at cutoff " + std::to_string(cutoff) +
                                "; increase the cutoff");
    return s.normalized();
}

StateVector tensor(const StateVector& a, const StateVector& b) {
    for (ModeId m : b.modes())
        if (a.has_mode(m))
            throw std::invalid_argument("tensor factors share mode " + std::to_string(m.value));
    std::vector<ModeId> modes = a.modes();
    modes.insert(modes.end(), b.modes().begin(), b.modes().end());
    StateVector out(std::move(modes), std::max(a.cutoff(), b.cutoff()));
    out.prune_ = std::min(a.prune_, b.prune_);
    out.terms_.reserve(a.terms_.size() * b.terms_.size());
    const int shift = 8 * static_cast<int>(a.modes().size());
    for (const auto& [ka, va] : a.terms_)
        for (const auto& [kb, vb] : b.terms_) out.terms_.emplace(ka | (kb << shift), va * vb);
    return out;
}

StateVector apply_beam_splitter(const StateVector& s, ModeId m1, ModeId m2,
                                const BeamSplitterParams& params) {
    if (m1 == m2) throw std::invalid_argument("beam splitter needs two distinct modes");
    const int a1 = s.mode_axis(m1);
    const int a2 = s.mode_axis(m2);
    const double ct = std::cos(params.theta / 2.0);
    const double st = std::sin(params.theta / 2.0);
    const Complex refl = params.conjugated ? Complex{0.0, -st} : Complex{0.0, st};

    StateVector out(s.modes(), s.cutoff());
    out.prune_ = s.prune_;
    out.terms_.reserve(s.terms_.size() * 2);

    std::vector<double> cpow;
    std::vector<Complex> rpow;
    std::vector<Complex> acc;
    for (const auto& [key, amp] : s.terms_) {
        const int n1 = StateVector::occupation(key, a1);
        const int n2 = StateVector::occupation(key, a2);
        const int total = n1 + n2;
        if (total > StateVector::kMaxOccupation)
            throw std::domain_error("beam splitter pair occupation exceeds supported maximum");
        cpow.assign(total + 1, 1.0);
        rpow.assign(total + 1, Complex{1.0, 0.0});
        for (int k = 1; k <= total; ++k) {
            cpow[k] = cpow[k - 1] * ct;
            rpow[k] = rpow[k - 1] * refl;
        }
        // Output amplitude on (p, total - p) from transmitting j of n1 and
        // k of n2: reflected quanta carry rpow, transmitted carry cpow.
        acc.assign(total + 1, Complex{0.0, 0.0});
        for (int j = 0; j <= n1; ++j) {
            const double bj = binomial(n1, j);
            for (int k = 0; k <= n2; ++k) {
                const int p = j + (n2 - k);
                acc[p] += bj * binomial(n2, k) * cpow[j + k] * rpow[total - j - k];
            }
        }
        for (int p = 0; p <= total; ++p) {
            const Complex contribution =
                amp * acc[p] * transition_weight(p, total - p, n1, n2);
            if (contribution == Complex{0.0, 0.0}) continue;
            std::uint64_t nk = StateVector::with_occupation(key, a1, p);
            nk = StateVector::with_occupation(nk, a2, total - p);
            out.terms_[nk] += contribution;
        }
    }

    // Prune, then flag any surviving occupation overflow.
    for (auto it = out.terms_.begin(); it != out.terms_.end();) {
        if (std::abs(it->second) <= out.prune_) {
            it = out.terms_.erase(it);
            continue;
        }
        const int o1 = StateVector::occupation(it->first, a1);
        const int o2 = StateVector::occupation(it->first, a2);
        if (o1 > out.cutoff_ || o2 > out.cutoff_)
            throw std::domain_error(
                "beam splitter output occupation " + std::to_string(std::max(o1, o2)) +
                " exceeds cutoff " + std::to_string(out.cutoff_) +
                " with non-negligible amplitude; increase the cutoff");
        ++it;
    }
    return out;
}

StateVector apply_phase(const StateVector& s, ModeId mode, double phi) {
    const int axis = s.mode_axis(mode);
    StateVector out = s;
    for (auto& [key, amp] : out.terms_) {
        const int n = StateVector::occupation(key, axis);
        amp *= std::polar(1.0, n * phi);
    }
    return out;
}

StateVector rename_mode(const StateVector& s, ModeId from, ModeId to) {
    s.mode_axis(from);
    if (from == to) return s;
    if (s.has_mode(to))
        throw std::invalid_argument("mode " + std::to_string(to.value) + " already present");
    StateVector out = s;
    for (auto& m : out.modes_)
        if (m == from) m = to;
    return out;
}

StateVector with_cutoff(const StateVector& s, int cutoff) {
    StateVector out(s.modes(), cutoff);
    out.set_prune_threshold(s.prune_threshold());
    s.for_each_term([&](const FockKet& ket, Complex amp) { out.add_term(ket, amp); });
    return out;
}

StateVector pruned(const StateVector& s, double threshold) {
    StateVector out(s.modes(), s.cutoff());
    out.prune_ = s.prune_;
    for (const auto& [key, amp] : s.terms_)
        if (std::abs(amp) > threshold) out.terms_.emplace(key, amp);
    return out;
}

double outcome_probability(const StateVector& s, const OutcomePattern& pattern) {
    std::vector<std::pair<int, int>> constraints;  // (axis, occupation)
    constraints.reserve(pattern.occupations.size());
    for (const auto& [mode, n] : pattern.occupations) {
        if (n < 0) throw std::invalid_argument("pattern occupation must be nonnegative");
        constraints.emplace_back(s.mode_axis(mode), n);
    }
    double total = 0.0;
    double matched = 0.0;
    for (const auto& [key, amp] : s.terms_) {
        const double w = std::norm(amp);
        total += w;
        bool ok = true;
        for (const auto& [axis, n] : constraints) {
            if (StateVector::occupation(key, axis) != n) {
                ok = false;
                break;
            }
        }
        if (ok) matched += w;
    }
    if (total == 0.0) return 0.0;
    return matched / total;
}

PostselectResult postselect(const StateVector& s, const std::vector<ModeId>& subset,
                            const std::function<bool(const OutcomePattern&)>& predicate) {
    std::vector<int> axes;
    axes.reserve(subset.size());
    for (ModeId m : subset) axes.push_back(s.mode_axis(m));

    StateVector projected(s.modes(), s.cutoff());
    projected.set_prune_threshold(s.prune_threshold());
    double matched = 0.0;
    double total = 0.0;
    OutcomePattern pat;
    pat.occupations.resize(subset.size());
    for (std::size_t i = 0; i < subset.size(); ++i) pat.occupations[i].first = subset[i];
    s.for_each_term([&](const FockKet& ket, Complex amp) {
        total += std::norm(amp);
        for (std::size_t i = 0; i < axes.size(); ++i)
            pat.occupations[i].second = ket[axes[i]];
        if (predicate(pat)) {
            matched += std::norm(amp);
            projected.add_term(ket, amp);
        }
    });
    PostselectResult result;
    result.probability = total == 0.0 ? 0.0 : matched / total;
    if (matched > 0.0) result.state = projected.normalized();
    return result;
}

FockKet sample_outcome(const StateVector& s, std::mt19937_64& rng) {
    const double n = s.norm();
    if (std::abs(n - 1.0) > 1e-9)
        throw std::domain_error("sample_outcome requires a normalised state (norm deviation " +
                                std::to_string(std::abs(n - 1.0)) + ")");
    const auto terms = s.sorted_terms();
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const double u = uniform(rng);
    double cdf = 0.0;
    for (const auto& [ket, amp] : terms) {
        cdf += std::norm(amp);
        if (u < cdf) return ket;
    }
    return terms.back().first;  // u landed in the rounding gap at the top
}

double mean_occupation(const StateVector& s, ModeId mode) {
    const int axis = s.mode_axis(mode);
    double total = 0.0;
    double weighted = 0.0;
    for (const auto& [key, amp] : s.terms_) {
        const double w = std::norm(amp);
        total += w;
        weighted += w * StateVector::occupation(key, axis);
    }
    if (total == 0.0) throw std::domain_error("mean occupation of the zero state");
    return weighted / total;
}

}  // namespace spnl::fock
